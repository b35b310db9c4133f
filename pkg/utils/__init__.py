# Utility module
