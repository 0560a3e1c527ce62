"""Regenerate the committed synthetic collections under data/.

    python scripts/make_synthetic_data.py
"""

import argparse
from pathlib import Path

import numpy as np

from encsearch.embeddings import EmbeddingTable, save_embeddings
from encsearch.synthetic import planted_collection
from encsearch.text import preprocess

ROOT = Path(__file__).resolve().parents[1]

DEMO_DOCS = {
    "wing": "Pressure distribution over a swept wing at supersonic speeds; the wing flows separate near the tip.",
    "nozzle": "Heat transfer in a rocket nozzle with turbulent boundary layers and high wall temperatures.",
    "shell": "Buckling of thin cylindrical shells under axial compression and external pressure loads.",
    "flutter": "Flutter of a panel in supersonic flow; aerodynamic damping and structural vibration.",
    "boundary": "Laminar boundary layer flows over a flat plate with suction and heat transfer.",
    "jet": "Noise generated by a turbulent jet exhausting into still air at high speed.",
}


def demo_table(seed: int = 5, n2: int = 8) -> EmbeddingTable:
    rng = np.random.default_rng(seed)
    words = sorted({t for text in DEMO_DOCS.values() for t in preprocess(text)})
    return EmbeddingTable(tuple(words), rng.normal(size=(len(words), n2)))


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default=str(ROOT / "data"))
    args = ap.parse_args()
    out = Path(args.out)
    planted_collection().write(out / "synthetic")
    demo = out / "demo" / "docs"
    demo.mkdir(parents=True, exist_ok=True)
    for name, text in DEMO_DOCS.items():
        (demo / f"{name}.txt").write_text(text + "\n")
    save_embeddings(demo_table(), out / "demo" / "embeddings.txt")
    print(f"wrote {out}/synthetic and {out}/demo")


if __name__ == "__main__":
    main()
