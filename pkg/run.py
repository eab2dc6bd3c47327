#!/usr/bin/env python3
"""
Script de démarrage du laboratoire : `python run.py <sous-commande> [options]`.
"""
from chilab.main import main

if __name__ == "__main__":
    main()
