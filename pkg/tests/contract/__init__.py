"""Contract tests validating the gz command-line reports and exit codes."""
