# dsprec tests
