import sys
from pathlib import Path

# Make sibling helper modules (synth.py, golden.py) importable from any test.
sys.path.insert(0, str(Path(__file__).parent))
