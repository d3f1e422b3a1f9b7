#include <cmath>

#include "doctest.h"
#include "modetrack/spectra.hpp"

using namespace modetrack;

namespace {

// Reference values computed with 30-digit arithmetic, frozen here.
struct RootRef {
  int m, n;
  double value;
};

const RootRef kBesselRoots[] = {
    {0, 1, 2.4048255576957728}, {0, 2, 5.5200781102863106},
    {0, 3, 8.6537279129110122}, {1, 1, 3.8317059702075123},
    {1, 2, 7.0155866698156188}, {2, 1, 5.1356223018406826},
    {3, 1, 6.3801618959239835}, {4, 2, 11.064709488501185},
    {5, 5, 22.217799896561268},
};

const RootRef kBesselDerivRoots[] = {
    {0, 1, 3.8317059702075123}, {0, 2, 7.0155866698156188},
    {1, 1, 1.8411837813406593}, {1, 2, 5.3314427735250326},
    {2, 1, 3.0542369282271403}, {3, 1, 4.2011889412105285},
    {4, 1, 5.3175531260839944}, {5, 5, 20.575514521386888},
};

struct JRef {
  int m;
  double x, value;
};

const JRef kBesselValues[] = {
    {0, 1.0, 0.76519768655796655},  {0, 5.0, -0.1775967713143383},
    {0, 50.0, 0.055812327669251815}, {0, 100.0, 0.019985850304223122},
    {1, 1.0, 0.44005058574493352},  {2, 7.5, -0.23027341052579026},
    {3, 20.0, -0.098901394560449676}, {5, 80.0, -0.06586234914003157},
};

}  // namespace

TEST_CASE("bessel_j: special points and frozen references") {
  CHECK(bessel_j(0, 0.0) == doctest::Approx(1.0));
  CHECK(bessel_j(1, 0.0) == doctest::Approx(0.0));
  CHECK(std::abs(bessel_j(0, 2.40482555769577)) <= 1e-10);
  for (const JRef& ref : kBesselValues)
    CHECK(std::abs(bessel_j(ref.m, ref.x) - ref.value) <= 1e-10);
  CHECK_THROWS_AS(bessel_j(-1, 1.0), std::invalid_argument);
}

TEST_CASE("bessel roots against frozen references") {
  for (const RootRef& ref : kBesselRoots)
    CHECK(std::abs(bessel_root(ref.m, ref.n) - ref.value) <= 1e-10);
  for (const RootRef& ref : kBesselDerivRoots)
    CHECK(std::abs(bessel_deriv_root(ref.m, ref.n) - ref.value) <= 1e-10);
  CHECK(bessel_root(0, 1) == doctest::Approx(2.40482555769577).epsilon(1e-13));
  CHECK(bessel_deriv_root(1, 1) ==
        doctest::Approx(1.84118378134066).epsilon(1e-13));
}

TEST_CASE("defining residual at the roots") {
  for (int m = 0; m <= 5; ++m)
    for (int n = 1; n <= 5; ++n) {
      CHECK(std::abs(bessel_j(m, bessel_root(m, n))) <= 1e-10);
      CHECK(std::abs(bessel_j_deriv(m, bessel_deriv_root(m, n))) <= 1e-10);
    }
}

TEST_CASE("root interlacing") {
  for (int m = 0; m <= 5; ++m)
    for (int n = 1; n < 5; ++n)
      CHECK(bessel_root(m, n) < bessel_root(m, n + 1));
  for (int m = 1; m <= 5; ++m)
    CHECK(bessel_root(m, 1) > bessel_deriv_root(m, 1));
}

TEST_CASE("pillbox_freq: annotated frequencies") {
  PillboxSpec spec{0.039, 1.0380, Medium::vacuum()};
  const double tm010 = pillbox_freq(spec, ModeLabel{ModeFamily::TM, 0, 1, 0}).freq;
  const double tm018 = pillbox_freq(spec, ModeLabel{ModeFamily::TM, 0, 1, 8}).freq;
  CHECK(std::abs(tm010 - 2.9421e9) / 2.9421e9 <= 1e-4);
  CHECK(std::abs(tm018 - 3.1608e9) / 3.1608e9 <= 1e-4);

  // p = 0 kills the longitudinal term: TM010 does not depend on d.
  PillboxSpec other{0.039, 0.123, Medium::vacuum()};
  CHECK(pillbox_freq(other, ModeLabel{ModeFamily::TM, 0, 1, 0}).freq ==
        doctest::Approx(tm010).epsilon(1e-14));

  // TE with p = 0 evaluates but is flagged non-physical.
  const PillboxFrequency te110 =
      pillbox_freq(spec, ModeLabel{ModeFamily::TE, 1, 1, 0});
  CHECK_FALSE(te110.physical);
  CHECK(te110.freq > 0.0);

  CHECK_THROWS_AS(pillbox_freq(spec, ModeLabel{ModeFamily::TM, 0, 0, 0}),
                  std::invalid_argument);
}

TEST_CASE("pillbox_spectrum: ordering, duplicates, completeness") {
  PillboxSpec spec{0.039, 1.0380, Medium::vacuum()};
  const AnalyticSpectrum spectrum = pillbox_spectrum(spec, 3.4e9);
  REQUIRE(!spectrum.entries.empty());

  const SpectrumEntry* first_tm = nullptr;
  const SpectrumEntry* first_te = nullptr;
  for (const SpectrumEntry& e : spectrum.entries) {
    if (!first_tm && e.label.family == ModeFamily::TM) first_tm = &e;
    if (!first_te && e.label.family == ModeFamily::TE) first_te = &e;
  }
  REQUIRE(first_tm != nullptr);
  CHECK(first_tm->label.m == 0);
  CHECK(first_tm->label.n == 1);
  CHECK(first_tm->label.p == 0);
  REQUIRE(first_te != nullptr);
  CHECK(first_te->label.m == 1);
  CHECK(first_te->label.n == 1);
  CHECK(first_te->label.p == 1);

  for (size_t i = 1; i < spectrum.entries.size(); ++i)
    CHECK(spectrum.entries[i - 1].freq <= spectrum.entries[i].freq);

  // Brute-force enumeration over a generous index box reproduces the list.
  size_t count = 0;
  for (int fam = 0; fam < 2; ++fam)
    for (int m = 0; m <= 40; ++m)
      for (int n = 1; n <= 40; ++n)
        for (int p = (fam == 0 ? 0 : 1); p <= 80; ++p) {
          ModeLabel label{fam == 0 ? ModeFamily::TM : ModeFamily::TE, m, n, p, 0};
          if (pillbox_freq(spec, label).freq < 3.4e9) count += m >= 1 ? 2 : 1;
        }
  CHECK(count == spectrum.entries.size());

  // m >= 1 labels appear in both polarizations at equal frequency.
  for (size_t i = 0; i < spectrum.entries.size(); ++i) {
    const SpectrumEntry& e = spectrum.entries[i];
    if (e.label.m < 1) continue;
    bool twin_found = false;
    for (const SpectrumEntry& o : spectrum.entries)
      if (o.label.same_cluster(e.label) &&
          o.label.polarization != e.label.polarization) {
        twin_found = true;
        CHECK(o.freq == e.freq);
      }
    CHECK(twin_found);
  }
}

TEST_CASE("pillbox near the crossing radius: TM010 and TE111 nearly equal") {
  PillboxSpec spec{0.0492, 0.1, Medium::vacuum()};
  const double f_tm = pillbox_freq(spec, ModeLabel{ModeFamily::TM, 0, 1, 0}).freq;
  const double f_te = pillbox_freq(spec, ModeLabel{ModeFamily::TE, 1, 1, 1}).freq;
  CHECK(std::abs(f_tm - f_te) / f_tm <= 0.002);
}

TEST_CASE("disk_spectrum_2d: Dirichlet and Neumann") {
  const AnalyticSpectrum dirichlet =
      disk_spectrum_2d(1.0, BoundaryCondition::Dirichlet, 6);
  CHECK(dirichlet.entries[0].lambda == doctest::Approx(5.7832).epsilon(1e-4));
  CHECK(dirichlet.entries[0].label.m == 0);
  CHECK(dirichlet.entries[0].label.n == 1);
  // Simple ground mode, then the double (1,1) pair.
  CHECK(dirichlet.entries[1].lambda == dirichlet.entries[2].lambda);
  CHECK(dirichlet.entries[1].label.m == 1);
  CHECK(dirichlet.entries[1].label.n == 1);
  const double x11 = bessel_root(1, 1);
  CHECK(dirichlet.entries[1].lambda == doctest::Approx(x11 * x11));

  const AnalyticSpectrum neumann =
      disk_spectrum_2d(1.0, BoundaryCondition::Neumann, 3);
  CHECK(neumann.entries[0].lambda == doctest::Approx(3.3900).epsilon(1e-4));
  CHECK(neumann.entries[0].label.m == 1);
  CHECK(neumann.entries[0].label.n == 1);

  // Radius scaling: lambda ~ 1/R^2.
  const AnalyticSpectrum scaled =
      disk_spectrum_2d(2.0, BoundaryCondition::Dirichlet, 1);
  CHECK(scaled.entries[0].lambda ==
        doctest::Approx(dirichlet.entries[0].lambda / 4.0));
}

TEST_CASE("classify: exact, perturbed, and out-of-tolerance") {
  PillboxSpec spec{0.039, 1.0380, Medium::vacuum()};
  const AnalyticSpectrum reference = pillbox_spectrum(spec, 3.4e9);

  const Classification tm018 = classify(3.1608e9, reference, 1e-3);
  CHECK(tm018.label.family == ModeFamily::TM);
  CHECK(tm018.label.m == 0);
  CHECK(tm018.label.n == 1);
  CHECK(tm018.label.p == 8);
  CHECK(tm018.polarization_resolved);

  const AnalyticSpectrum disk =
      disk_spectrum_2d(1.0, BoundaryCondition::Dirichlet, 8);
  const double f01 = disk.entries[0].freq;
  const Classification ground = classify(f01 * (1.0 + 5e-5), disk, 1e-3);
  CHECK(ground.label.m == 0);
  CHECK(ground.label.n == 1);
  CHECK(ground.polarization_resolved);

  // Degenerate cluster: polarization flagged unresolved.
  const Classification dipole = classify(disk.entries[1].freq, disk, 1e-3);
  CHECK(dipole.label.m == 1);
  CHECK_FALSE(dipole.polarization_resolved);

  // Midway between two well-separated labels: tolerance violation.
  const double midway = 0.5 * (disk.entries[0].freq + disk.entries[1].freq);
  CHECK_THROWS_AS(classify(midway, disk, 1e-3), ClassificationError);
}

TEST_CASE("classification round-trip over the whole spectrum") {
  PillboxSpec spec{0.039, 1.0380, Medium::vacuum()};
  const AnalyticSpectrum reference = pillbox_spectrum(spec, 3.3e9);
  for (const SpectrumEntry& e : reference.entries) {
    const Classification cls = classify(e.freq, reference, 1e-9);
    CHECK(cls.label.same_cluster(e.label));
    if (e.label.m >= 1) CHECK_FALSE(cls.polarization_resolved);
  }
}

TEST_CASE("crossing_radius: annotated crossing and defining residual") {
  const ModeLabel tm010{ModeFamily::TM, 0, 1, 0};
  const ModeLabel te111{ModeFamily::TE, 1, 1, 1};
  const double r_star = crossing_radius(0.1, tm010, te111);
  CHECK(std::abs(r_star - 0.04924) <= 5e-5);

  PillboxSpec spec{r_star, 0.1, Medium::vacuum()};
  const double fa = pillbox_freq(spec, tm010).freq;
  const double fb = pillbox_freq(spec, te111).freq;
  CHECK(std::abs(fa - fb) / fa <= 1e-10);

  CHECK_THROWS_AS(crossing_radius(0.1, tm010, tm010), std::invalid_argument);
  // Same longitudinal index: the curves never intersect.
  CHECK_THROWS_AS(crossing_radius(0.1, tm010, ModeLabel{ModeFamily::TM, 1, 1, 0}),
                  std::invalid_argument);
}

TEST_CASE("parse_mode_label formats") {
  const ModeLabel a = parse_mode_label("TM 0 1 17");
  CHECK(a.family == ModeFamily::TM);
  CHECK(a.m == 0);
  CHECK(a.n == 1);
  CHECK(a.p == 17);

  const ModeLabel b = parse_mode_label("TE,1,1,2");
  CHECK(b.family == ModeFamily::TE);
  CHECK(b.p == 2);

  const ModeLabel c = parse_mode_label("TM010");
  CHECK(c.m == 0);
  CHECK(c.n == 1);
  CHECK(c.p == 0);

  const ModeLabel d = parse_mode_label("(2,1)");
  CHECK(d.m == 2);
  CHECK(d.n == 1);
  CHECK(d.p == 0);

  CHECK_THROWS_AS(parse_mode_label("bogus"), std::invalid_argument);
  CHECK_THROWS_AS(parse_mode_label("TM 0 0 0"), std::invalid_argument);
}
