"""Build data/demand_temperature.csv from the fpp2 `elecdemand` series.

The source is half-hourly Victoria (AU) electricity demand (GW) and
temperature (deg C) for 2014, distributed with the `rdatasets` package.
Consecutive half-hours are averaged into hourly rows stamped at the start
of the hour.

    pip install rdatasets
    python tools/make_demand_csv.py
"""
import datetime as dt
import pathlib

import rdatasets

OUT = pathlib.Path(__file__).resolve().parent.parent / "data" / "demand_temperature.csv"


def main() -> None:
    df = rdatasets.data("fpp2", "elecdemand")
    demand = df["Demand"].to_numpy()
    temp = df["Temperature"].to_numpy()
    assert len(demand) % 2 == 0
    start = dt.datetime(2014, 1, 1)
    with OUT.open("w") as fh:
        fh.write("Datetime,Demand,Temperature\n")
        for k in range(len(demand) // 2):
            stamp = start + dt.timedelta(hours=k)
            d = 0.5 * (demand[2 * k] + demand[2 * k + 1])
            t = 0.5 * (temp[2 * k] + temp[2 * k + 1])
            fh.write(f"{stamp:%Y-%m-%d %H:%M:%S},{d:.6f},{t:.2f}\n")


if __name__ == "__main__":
    main()
