# performance tests package
