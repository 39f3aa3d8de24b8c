"""Retailer-side demand response for residential PEV fleets."""
