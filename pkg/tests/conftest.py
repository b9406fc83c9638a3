import sys
from pathlib import Path

# Make the shared brute-force oracles importable as `oracles` from any test module.
sys.path.insert(0, str(Path(__file__).parent))
