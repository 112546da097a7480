"""Approximate maximin-share allocation of indivisible goods with exact arithmetic."""
