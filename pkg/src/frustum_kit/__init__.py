"""Algebra of affine viewing frusta stored as projection/inverse matrix pairs."""
