# edge_cases tests package
