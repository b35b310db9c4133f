# Core processing module
