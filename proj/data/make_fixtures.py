"""Regenerates the CSV fixtures in this directory."""
import numpy as np

rng = np.random.default_rng(20240601)


def save(name, rows, header):
    np.savetxt(name, rows, delimiter=",", header=header, comments="", fmt="%.10f")


save("gaussian_x.csv", rng.standard_normal((60, 2)), "x1,x2")
save("gaussian_y_shifted.csv", rng.standard_normal((60, 2)) + 0.6, "x1,x2")

save("independent_xy.csv", rng.standard_normal((120, 4)), "x1,x2,y1,y2")

xp = rng.standard_normal((120, 2))
yp = rng.standard_normal((120, 2))
e = 5.0 / np.sqrt(120)
save("konijn_xy.csv", np.hstack([(1 - e) * xp + e * yp, e * xp + (1 - e) * yp]), "x1,x2,y1,y2")

with open("malformed.csv", "w") as f:
    f.write("x1,x2\n0.1,0.2\n0.3,0.4\n0.5,abc\n0.7,0.8\n")
