"""Physical constants (CODATA 2018) used by the experiment-scale mapping."""

HBAR_JS = 1.054571817e-34          # reduced Planck constant, J s
PROTON_MASS_KG = 1.67262192369e-27
BOHR_RADIUS_M = 5.29177210903e-11

# natural denominator for molecular-scale results: m_p * a_0^2 in kg m^2
PROTON_BOHR2 = PROTON_MASS_KG * BOHR_RADIUS_M**2
