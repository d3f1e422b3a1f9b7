#include "modetrack/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace modetrack {

namespace {

constexpr double kPi = std::numbers::pi;

void validate_label(const ModeLabel& l) {
  if (l.m < 0 || l.n < 1 || l.p < 0)
    throw std::invalid_argument("mode label: need m >= 0, n >= 1, p >= 0");
  if (l.polarization != 0 && l.polarization != 1)
    throw std::invalid_argument("mode label: polarization must be 0 or 1");
  if (l.m == 0 && l.polarization != 0)
    throw std::invalid_argument("mode label: m = 0 modes have one polarization");
}

// Transverse Bessel root of a label: x_mn for TM, x'_mn for TE.
double transverse_root(const ModeLabel& l) {
  return l.family == ModeFamily::TM ? bessel_root(l.m, l.n)
                                    : bessel_deriv_root(l.m, l.n);
}

double angular_freq(double root, double radius, double length, int p,
                    const Medium& medium) {
  const double kr = root / radius;
  const double kz = p * kPi / length;
  return medium.wave_speed() * std::sqrt(kr * kr + kz * kz);
}

// Finds the nth positive root of f by sign bracketing on unit intervals
// starting just above zero, then bisection. Consecutive positive roots of
// J_m and J'_m are more than one apart, so unit steps cannot skip a root.
template <typename F>
double bracketed_root(F&& f, int n) {
  int found = 0;
  double a = 1e-9;
  double fa = f(a);
  for (int guard = 0; guard < 100000; ++guard) {
    double b = std::floor(a) + 1.0;
    double fb = f(b);
    if (fa == 0.0) return a;
    if (fa * fb < 0.0) {
      ++found;
      if (found == n) {
        for (int it = 0; it < 200 && b - a > 1e-14 * b; ++it) {
          const double mid = 0.5 * (a + b);
          const double fm = f(mid);
          if (fm == 0.0) return mid;
          if (fa * fm < 0.0) {
            b = mid;
          } else {
            a = mid;
            fa = fm;
          }
        }
        return 0.5 * (a + b);
      }
    }
    a = b;
    fa = fb;
  }
  throw std::runtime_error("bessel root bracketing did not converge");
}

struct RootCache {
  std::mutex mtx;
  std::map<std::pair<int, int>, double> roots;       // x_mn
  std::map<std::pair<int, int>, double> deriv_roots; // x'_mn
};

RootCache& root_cache() {
  static RootCache cache;
  return cache;
}

}  // namespace

double bessel_j(int m, double x) {
  if (m < 0 || x < 0.0)
    throw std::invalid_argument("bessel_j: need m >= 0 and x >= 0");
  return std::cyl_bessel_j(static_cast<double>(m), x);
}

double bessel_j_deriv(int m, double x) {
  if (m == 0) return -bessel_j(1, x);
  return 0.5 * (bessel_j(m - 1, x) - bessel_j(m + 1, x));
}

double bessel_root(int m, int n) {
  if (m < 0 || n < 1) throw std::invalid_argument("bessel_root: m >= 0, n >= 1");
  auto& cache = root_cache();
  std::lock_guard lock(cache.mtx);
  auto [it, inserted] = cache.roots.try_emplace({m, n}, 0.0);
  if (inserted)
    it->second = bracketed_root([m](double x) { return bessel_j(m, x); }, n);
  return it->second;
}

double bessel_deriv_root(int m, int n) {
  if (m < 0 || n < 1)
    throw std::invalid_argument("bessel_deriv_root: m >= 0, n >= 1");
  auto& cache = root_cache();
  std::lock_guard lock(cache.mtx);
  auto [it, inserted] = cache.deriv_roots.try_emplace({m, n}, 0.0);
  if (inserted)
    it->second =
        bracketed_root([m](double x) { return bessel_j_deriv(m, x); }, n);
  return it->second;
}

std::string to_string(ModeFamily family) {
  return family == ModeFamily::TM ? "TM" : "TE";
}

std::string to_string(const ModeLabel& label) {
  std::ostringstream os;
  os << to_string(label.family) << " " << label.m << " " << label.n << " "
     << label.p;
  if (label.m >= 1) os << " (pol " << label.polarization << ")";
  return os.str();
}

ModeLabel parse_mode_label(const std::string& text) {
  std::string s;
  for (char c : text)
    if (c != '(' && c != ')') s.push_back(c == ',' || c == ':' ? ' ' : c);

  ModeLabel label;
  std::istringstream is(s);
  std::string head;
  if (!(is >> head)) throw std::invalid_argument("empty mode label");

  auto starts_with_family = [&](const char* fam) {
    return head.size() >= 2 && head[0] == fam[0] && head[1] == fam[1];
  };
  if (starts_with_family("TM") || starts_with_family("TE")) {
    label.family = head[1] == 'M' ? ModeFamily::TM : ModeFamily::TE;
    std::string rest = head.substr(2);
    std::vector<int> idx;
    if (!rest.empty()) {
      // Compact form: one digit per index, e.g. TM010.
      for (char c : rest) {
        if (c < '0' || c > '9')
          throw std::invalid_argument("bad mode label: " + text);
        idx.push_back(c - '0');
      }
    }
    int v;
    while (is >> v) idx.push_back(v);
    if (idx.size() < 2 || idx.size() > 4)
      throw std::invalid_argument("bad mode label: " + text);
    label.m = idx[0];
    label.n = idx[1];
    label.p = idx.size() >= 3 ? idx[2] : 0;
    label.polarization = idx.size() == 4 ? idx[3] : 0;
  } else {
    // 2D form "(m,n)": indices only, TM by convention (Dirichlet surrogate).
    std::vector<int> idx;
    idx.push_back(std::stoi(head));
    int v;
    while (is >> v) idx.push_back(v);
    if (idx.size() < 2 || idx.size() > 3)
      throw std::invalid_argument("bad mode label: " + text);
    label.m = idx[0];
    label.n = idx[1];
    label.p = 0;
    label.polarization = idx.size() == 3 ? idx[2] : 0;
  }
  validate_label(label);
  return label;
}

PillboxFrequency pillbox_freq(const PillboxSpec& spec, const ModeLabel& label) {
  validate_label(label);
  if (spec.radius <= 0.0 || spec.length <= 0.0)
    throw std::invalid_argument("pillbox_freq: R and d must be positive");
  PillboxFrequency out;
  out.freq = angular_freq(transverse_root(label), spec.radius, spec.length,
                          label.p, spec.medium) /
             (2.0 * kPi);
  out.physical = !(label.family == ModeFamily::TE && label.p == 0);
  return out;
}

AnalyticSpectrum pillbox_spectrum(const PillboxSpec& spec, double f_max) {
  AnalyticSpectrum spectrum;
  spectrum.f_max = f_max;
  const double c = spec.medium.wave_speed();

  for (int fam = 0; fam < 2; ++fam) {
    const ModeFamily family = fam == 0 ? ModeFamily::TM : ModeFamily::TE;
    const int p_min = family == ModeFamily::TM ? 0 : 1;  // no physical TE p=0
    for (int m = 0;; ++m) {
      // Smallest frequency for this m: n = 1, p = p_min.
      ModeLabel lowest{family, m, 1, p_min, 0};
      if (pillbox_freq(spec, lowest).freq >= f_max) break;
      for (int n = 1;; ++n) {
        ModeLabel base{family, m, n, p_min, 0};
        if (pillbox_freq(spec, base).freq >= f_max) break;
        for (int p = p_min;; ++p) {
          ModeLabel label{family, m, n, p, 0};
          const double f = pillbox_freq(spec, label).freq;
          if (f >= f_max) break;
          const double k = 2.0 * kPi * f / c;
          spectrum.entries.push_back({label, f, k * k});
          if (m >= 1) {
            ModeLabel twin = label;
            twin.polarization = 1;
            spectrum.entries.push_back({twin, f, k * k});
          }
        }
      }
    }
  }
  std::stable_sort(spectrum.entries.begin(), spectrum.entries.end(),
                   [](const SpectrumEntry& a, const SpectrumEntry& b) {
                     return a.freq < b.freq;
                   });
  return spectrum;
}

AnalyticSpectrum disk_spectrum_2d(double radius, BoundaryCondition bc,
                                  int count, const Medium& medium) {
  if (count < 1) throw std::invalid_argument("disk_spectrum_2d: count >= 1");
  if (radius <= 0.0) throw std::invalid_argument("disk_spectrum_2d: radius > 0");
  const ModeFamily family =
      bc == BoundaryCondition::Dirichlet ? ModeFamily::TM : ModeFamily::TE;

  // Enumerate (m, n) by increasing root; roots grow with both indices, so a
  // generous index box around `count` suffices.
  const int box = count + 8;
  std::vector<SpectrumEntry> all;
  for (int m = 0; m <= box; ++m)
    for (int n = 1; n <= box; ++n) {
      const double root = bc == BoundaryCondition::Dirichlet
                              ? bessel_root(m, n)
                              : bessel_deriv_root(m, n);
      const double lambda = (root / radius) * (root / radius);
      const double f = medium.wave_speed() * root / (2.0 * kPi * radius);
      all.push_back({ModeLabel{family, m, n, 0, 0}, f, lambda});
      if (m >= 1) all.push_back({ModeLabel{family, m, n, 0, 1}, f, lambda});
    }
  std::stable_sort(all.begin(), all.end(),
                   [](const SpectrumEntry& a, const SpectrumEntry& b) {
                     return a.lambda < b.lambda;
                   });
  AnalyticSpectrum spectrum;
  spectrum.entries.assign(all.begin(),
                          all.begin() + std::min<size_t>(count, all.size()));
  spectrum.f_max = spectrum.entries.back().freq;
  return spectrum;
}

Classification classify(double freq, const AnalyticSpectrum& reference,
                        double rel_tol) {
  if (reference.entries.empty())
    throw std::invalid_argument("classify: empty reference spectrum");
  const SpectrumEntry* best = nullptr;
  double best_err = std::numeric_limits<double>::infinity();
  for (const SpectrumEntry& entry : reference.entries) {
    const double err = std::abs(entry.freq - freq) / entry.freq;
    if (err < best_err) {
      best_err = err;
      best = &entry;
    }
  }
  if (best_err > rel_tol) {
    std::ostringstream os;
    os << "classify: no label within rel_tol " << rel_tol
       << " of f = " << freq << " Hz (best " << to_string(best->label)
       << " at rel err " << best_err << ")";
    throw ClassificationError(os.str());
  }
  Classification out{best->label, best_err, true};
  // Degenerate cluster (equal analytic frequency): polarization undecidable
  // from the frequency alone.
  for (const SpectrumEntry& entry : reference.entries)
    if (entry.freq == best->freq && !(entry.label == best->label))
      out.polarization_resolved = false;
  return out;
}

double crossing_radius(double length, const ModeLabel& a, const ModeLabel& b,
                       const Medium& medium) {
  validate_label(a);
  validate_label(b);
  if (a.same_cluster(b))
    throw std::invalid_argument(
        "crossing_radius: identical labels have identical curves");
  const double xa = transverse_root(a), xb = transverse_root(b);

  // f_a(R) = f_b(R)  <=>  (xa^2 - xb^2)/R^2 = (pb^2 - pa^2) pi^2 / d^2.
  const double num = xa * xa - xb * xb;
  const double den = (static_cast<double>(b.p) * b.p - static_cast<double>(a.p) * a.p) *
                     kPi * kPi / (length * length);
  if (den == 0.0 || num / den <= 0.0)
    throw std::invalid_argument("crossing_radius: curves do not intersect");
  const double closed_form = std::sqrt(num / den);

  // Bisection fallback on the defining residual, bracketing around the
  // closed-form value; keeps the result valid if the formula is ever
  // generalized past Eq.-style spectra.
  auto diff = [&](double r) {
    PillboxSpec spec{r, length, medium};
    return pillbox_freq(spec, a).freq - pillbox_freq(spec, b).freq;
  };
  double lo = closed_form * 0.5, hi = closed_form * 2.0;
  if (diff(lo) * diff(hi) < 0.0) {
    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (diff(lo) * diff(mid) <= 0.0)
        hi = mid;
      else
        lo = mid;
    }
    return 0.5 * (lo + hi);
  }
  return closed_form;
}

}  // namespace modetrack
