# Cubic Newton package initialization
