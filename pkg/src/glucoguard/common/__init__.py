"""Code shared by all glucoguard sub-packages."""
