# Benchmark package initialization
