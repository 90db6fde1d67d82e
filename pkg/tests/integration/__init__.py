# End-to-end tests driving the dsprec command line
