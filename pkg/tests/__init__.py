"""
Testes do toolkit Pandora Over Time
"""
