"""
Test package for restricted_proj
"""
