import os
import sys

# make reference.py and helpers.py importable no matter how pytest was invoked
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))
