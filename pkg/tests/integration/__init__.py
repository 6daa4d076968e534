# integration tests - only run when explicitly called
