# fleetopt: airline fleet assignment models and solvers
