#!/usr/bin/env python3
"""Write the bundled synthetic sample panels to data/sample/."""
from pathlib import Path

import pandas as pd

from freqpanel.ingest import write_long_csv
from freqpanel.sample import sample_growth_panel, sample_temperature_panel, sample_weights


def main(outdir: Path = Path("data/sample")) -> None:
    outdir.mkdir(parents=True, exist_ok=True)
    write_long_csv(sample_temperature_panel(), outdir / "temperature.csv")
    write_long_csv(sample_growth_panel(), outdir / "growth.csv")
    w = sample_weights()
    pd.DataFrame({"unit": list(w), "weight": list(w.values())}).to_csv(
        outdir / "weights.csv", index=False
    )
    print(f"wrote sample panels to {outdir}/")


if __name__ == "__main__":
    main()
