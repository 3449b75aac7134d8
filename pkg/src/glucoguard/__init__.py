"""Hypoglycemia detection, ledger and rescue-dosing toolkit."""
