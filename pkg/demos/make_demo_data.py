"""
Regenerate the shipped datasets under data/
===========================================

Both files are fully seeded, so this script reproduces them byte for
byte.  The spectral set mimics the shape and difficulty of the classic
208x60 echo-spectrum benchmark (which cannot be redistributed here); the
Gaussian set is a genuinely wide problem (60 instances, 200 features).
"""

from pathlib import Path

from widefs.dataset import generate_gaussian_dataset, generate_spectral_dataset, save_csv

DATA = Path(__file__).resolve().parent.parent / "data"
DATA.mkdir(exist_ok=True)

sonar = generate_spectral_dataset()
save_csv(sonar, DATA / "sonar_surrogate.csv")
print(f"sonar_surrogate.csv: {sonar.n_instances} x {sonar.n_features}, {sonar.class_counts()}")

wide = generate_gaussian_dataset(
    n_per_class=30, n_features=200, n_informative=30, shift=0.5, seed=77, name="gauss_wide"
)
save_csv(wide, DATA / "gauss_wide.csv")
print(f"gauss_wide.csv: {wide.n_instances} x {wide.n_features}, {wide.class_counts()}")

manifest = DATA / "manifest.csv"
manifest.write_text(
    "# name,path,instances,features (raw CSV shape before two-class restriction)\n"
    "sonar_surrogate,sonar_surrogate.csv,208,60\n"
    "gauss_wide,gauss_wide.csv,60,200\n",
    encoding="utf-8",
)
print(f"wrote {manifest}")
