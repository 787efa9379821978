import sys
from pathlib import Path

# tests are a plain directory, not a package; make `import oracles` work
sys.path.insert(0, str(Path(__file__).resolve().parent))
