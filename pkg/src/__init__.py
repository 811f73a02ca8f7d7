# Sparse Walsh-Hadamard recovery - package init
