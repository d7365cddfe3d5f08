#include <gtest/gtest.h>

#include <random>

#include "jtpol/collective.hpp"
#include "jtpol/eigen_dense.hpp"
#include "jtpol/reference.hpp"
#include "jtpol/spectra.hpp"
#include "oracles/oracles.hpp"

using namespace jtpol;

namespace {

const MolecularSpectrum& spectrum(int n_max, double kappa = ModelParams{}.kappa) {
  static std::map<std::pair<int, double>, MolecularSpectrum> cache;
  auto it = cache.find({n_max, kappa});
  if (it == cache.end()) {
    ModelParams p;
    p.n_max = n_max;
    p.kappa = kappa;
    it = cache.emplace(std::pair{n_max, kappa}, diagonalize_molecule(p)).first;
  }
  return it->second;
}

CavityParams cavity(int N, const MolecularSpectrum& spec) {
  CavityParams c;
  c.N = N;
  c = c.resolved(spec);
  c.Omega = 0.1 * *c.omega_c;
  return c;
}

CVector random_vector(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> d;
  CVector x(static_cast<Eigen::Index>(n));
  for (auto& v : x) v = cplx(d(rng), d(rng));
  return x;
}

}  // namespace

TEST(SectorBasis, SingleMoleculeDimension) {
  const auto b = enumerate_sector_basis(1, 1, -1, spectrum(18));
  EXPECT_EQ(b.size(), 70u);
}

TEST(SectorBasis, TwoMoleculeDimensionAndDecomposition) {
  const auto b = enumerate_sector_basis(2, 1, -1, spectrum(18));
  const auto oc = oracle::sector_count(2, -1, 18);
  EXPECT_EQ(oc.excited_p0, 7770);
  EXPECT_EQ(oc.ground_lcp, 1938);
  EXPECT_EQ(oc.ground_rcp, 1956);
  EXPECT_EQ(b.size(), 11664u);
  long p0 = 0, lcp = 0, rcp = 0;
  for (const auto& s : b.states()) (s.photon == 0 ? p0 : s.photon > 0 ? lcp : rcp)++;
  EXPECT_EQ(p0, oc.excited_p0);
  EXPECT_EQ(lcp, oc.ground_lcp);
  EXPECT_EQ(rcp, oc.ground_rcp);
}

TEST(SectorBasis, MinimalCutoff) {
  const auto& spec = spectrum(1);
  const auto b = enumerate_sector_basis(1, 1, -1, spec);
  ASSERT_EQ(b.size(), 2u);
  EXPECT_EQ(b.state(0).photon, -1);
  EXPECT_EQ(b.state(1).photon, 0);
  EXPECT_EQ(spec.level(b.state(1).occupations.front().first).v, -1);
}

TEST(SectorBasis, SizesFollowClosedFormForAllCutoffs) {
  for (int n_max = 1; n_max <= 18; ++n_max) {
    const auto& spec = spectrum(n_max);
    for (int j : {-3, -1, 1}) {
      EXPECT_EQ(static_cast<long>(enumerate_sector_basis(1, 1, j, spec).size()), oracle::sector_count(1, j, n_max).total())
          << "n_max=" << n_max << " j=" << j;
    }
    if (n_max <= 8)
      EXPECT_EQ(static_cast<long>(enumerate_sector_basis(2, 1, -1, spec).size()),
                oracle::sector_count(2, -1, n_max).total())
          << "n_max=" << n_max;
  }
}

TEST(SectorBasis, StatesSatisfySectorConstraintsInCanonicalOrder) {
  const auto& spec = spectrum(6);
  const auto b = enumerate_sector_basis(2, 1, -1, spec);
  for (std::size_t k = 0; k < b.size(); ++k) {
    const auto& s = b.state(k);
    EXPECT_EQ(excitation_number(s, spec), 1);
    EXPECT_EQ(total_angular_momentum(s, spec), -1);
    int count = 0;
    for (const auto& [l, c] : s.occupations) count += c;
    EXPECT_EQ(count, 2);
    EXPECT_EQ(b.find(s), k);
    if (k > 0) EXPECT_TRUE(b.state(k - 1) < s);
  }
}

TEST(SectorBasis, GroundStateWithoutPhotonIsAbsent) {
  const auto& spec = spectrum(6);
  const auto b = enumerate_sector_basis(1, 1, -1, spec);
  OccupationState g;
  g.occupations = {{spec.ground_level(), 1}};
  g.photon = 0;
  EXPECT_FALSE(b.find(g).has_value());
}

TEST(SectorBasis, MissingSectorIsNamed) {
  ModelParams p;
  p.n_max = 6;
  const auto partial = diagonalize_molecule(p, {-1, 0});
  try {
    enumerate_sector_basis(1, 1, -1, partial);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("v=-2"), std::string::npos) << e.what();
  }
}

TEST(SectorBasis, RetentionFilterShrinksBasis) {
  const auto& spec = spectrum(8);
  RetentionFilter r;
  r.max_levels_per_sector = 3;
  r.v_cap = 3;
  const auto b = enumerate_sector_basis(2, 1, -1, spec, r);
  EXPECT_LT(b.size(), enumerate_sector_basis(2, 1, -1, spec).size());
  for (const auto& s : b.states())
    for (const auto& [l, c] : s.occupations) EXPECT_TRUE(r.keeps(spec.level(l)));
  EXPECT_NO_THROW(assemble_hamiltonian(b, spec, cavity(2, spec)));
}

TEST(CollectiveOperators, Diagonal) {
  const auto& spec = spectrum(4);
  const auto b = enumerate_sector_basis(2, 1, -1, spec);
  std::mt19937_64 rng(1);
  const auto x = random_vector(b.size(), rng);
  CVector sum = CVector::Zero(x.size());
  for (std::size_t l = 0; l < spec.levels().size(); ++l) sum += apply_diagonal(l, b, x);
  EXPECT_LE((sum - 2.0 * x).norm(), 1e-12 * x.norm());
  for (std::size_t k = 0; k < b.size(); ++k) {
    CVector e = CVector::Zero(x.size());
    e[static_cast<Eigen::Index>(k)] = 1.0;
    const auto& [l, c] = b.state(k).occupations.front();
    EXPECT_EQ(apply_diagonal(l, b, e)[static_cast<Eigen::Index>(k)], cplx(c));
  }
}

TEST(CollectiveOperators, LadderFactor) {
  OccupationState s;
  s.occupations = {{5, 2}};
  auto moved = move_molecule(s, 3, 5);
  ASSERT_TRUE(moved);
  EXPECT_NEAR(moved->second, std::sqrt(2.0), 1e-15);
  EXPECT_EQ(moved->first.count(3), 1);
  EXPECT_EQ(moved->first.count(5), 1);
  EXPECT_FALSE(move_molecule(s, 3, 4).has_value());
}

TEST(CollectiveOperators, LadderAdjointness) {
  const auto& spec = spectrum(3);
  const auto b = union_basis(enumerate_sector_basis(2, 0, 0, spec), enumerate_sector_basis(2, 0, -2, spec));
  std::mt19937_64 rng(2);
  const std::size_t n = spec.levels().size();
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t j = rng() % n, k = rng() % n;
    const auto x = random_vector(b.size(), rng), y = random_vector(b.size(), rng);
    const auto minus = apply_ladder(j, k, LadderDirection::Minus, b, x);
    const auto plus = apply_ladder(j, k, LadderDirection::Plus, b, y);
    EXPECT_LE(std::abs(y.dot(minus.y) - std::conj(x.dot(plus.y))), 1e-10 * x.norm() * y.norm());
  }
}

TEST(Assembly, TavisCummingsDoublet) {
  const auto& spec = spectrum(6, 0.0);
  for (int N : {1, 2}) {
    CavityParams c;
    c.N = N;
    c.omega_c = 7.0;
    c.Omega = 0.7;
    const auto b = enumerate_sector_basis(N, 1, -1, spec);
    const auto eig = eig_dense(assemble_hamiltonian(b, spec, c), true);
    auto sticks = stick_spectrum(eig, bright_index(b, spec));
    std::vector<Stick> bright;
    for (const auto& s : sticks)
      if (s.intensity > 1e-12) bright.push_back(s);
    ASSERT_EQ(bright.size(), 2u) << "N=" << N;
    EXPECT_NEAR(bright[0].energy, 7.0 - 0.35, 1e-9);
    EXPECT_NEAR(bright[1].energy, 7.0 + 0.35, 1e-9);
    EXPECT_NEAR(bright[0].intensity, 0.5, 1e-9);
    EXPECT_NEAR(bright[1].intensity, 0.5, 1e-9);
  }
}

TEST(Assembly, SingleMoleculeMatchesPrimitiveBasis) {
  const auto& spec = spectrum(6);
  const auto c = cavity(1, spec);
  const auto a = eig_dense(assemble_hamiltonian(enumerate_sector_basis(1, 1, -1, spec), spec, c), false);
  const auto m = reference::build_primitive_model(spec.params(), *c.omega_c, c.Omega, 1, Sector{1, -1});
  const auto r = eig_dense(m.hamiltonian, false);
  ASSERT_EQ(a.size(), r.size());
  for (std::size_t k = 0; k < a.size(); ++k) EXPECT_NEAR(a.values[k], r.values[k], 1e-9);
}

TEST(Assembly, TwoMoleculeSpectrumIsSubsetOfTensorProduct) {
  const auto& spec = spectrum(4);
  const auto c = cavity(2, spec);
  const auto a = eig_dense(assemble_hamiltonian(enumerate_sector_basis(2, 1, -1, spec), spec, c), false);
  const auto m = reference::build_primitive_model(spec.params(), *c.omega_c, c.Omega, 2, Sector{1, -1});
  const auto r = eig_dense(m.hamiltonian, false);
  EXPECT_GT(r.size(), a.size());
  for (double e : a.values) {
    const auto it = std::lower_bound(r.values.begin(), r.values.end(), e - 1e-9);
    ASSERT_NE(it, r.values.end());
    EXPECT_NEAR(*it, e, 1e-9);
  }
}

TEST(Assembly, UnionThenProjectEqualsSectorBlock) {
  const auto& spec = spectrum(4);
  const auto c = cavity(2, spec);
  const auto s1 = enumerate_sector_basis(2, 1, -1, spec);
  const auto s0 = enumerate_sector_basis(2, 0, 0, spec);
  const auto u = union_basis(s0, s1);
  const CMatrix hu = assemble_hamiltonian(u, spec, c).to_dense();
  const CMatrix hs = assemble_hamiltonian(s1, spec, c).to_dense();
  double worst = 0.0, cross = 0.0;
  for (std::size_t a = 0; a < s1.size(); ++a) {
    const auto ua = static_cast<Eigen::Index>(*u.find(s1.state(a)));
    for (std::size_t b = 0; b < s1.size(); ++b)
      worst = std::max(worst, std::abs(hu(ua, static_cast<Eigen::Index>(*u.find(s1.state(b)))) -
                                       hs(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b))));
    for (const auto& g : s0.states()) cross = std::max(cross, std::abs(hu(ua, static_cast<Eigen::Index>(*u.find(g)))));
  }
  EXPECT_LE(worst, 1e-12);
  EXPECT_EQ(cross, 0.0);
}

TEST(Assembly, CouplingScalesLinearly) {
  const auto& spec = spectrum(5);
  auto c = cavity(2, spec);
  const auto b = enumerate_sector_basis(2, 1, -1, spec);
  const CMatrix h1 = assemble_hamiltonian(b, spec, c).to_dense();
  c.Omega *= 2.0;
  const CMatrix h2 = assemble_hamiltonian(b, spec, c).to_dense();
  const CMatrix d1 = h1.diagonal().asDiagonal(), d2 = h2.diagonal().asDiagonal();
  EXPECT_EQ((d1 - d2).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_LE(((h2 - d2) - 2.0 * (h1 - d1)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Assembly, OutOfBasisElementIsAnError) {
  const auto& spec = spectrum(4);
  const auto full = enumerate_sector_basis(1, 1, -1, spec);
  // Dropping the LCP branch leaves the p=0 states coupled to nothing valid.
  std::vector<OccupationState> states;
  for (const auto& s : full.states())
    if (s.photon != 1) states.push_back(s);
  SectorBasis broken(1, {Sector{1, -1}}, states, {});
  EXPECT_THROW(assemble_hamiltonian(broken, spec, cavity(1, spec)), Error);
}

TEST(Assembly, ManualBrightElement) {
  const auto& spec = spectrum(6);
  const auto c = cavity(2, spec);
  const auto b = enumerate_sector_basis(2, 1, -1, spec);
  const auto h = assemble_hamiltonian(b, spec, c);
  const auto k = bright_index(b, spec);
  EXPECT_NEAR(h.diagonal(k), *c.omega_c + 2.0 * spec.level(spec.ground_level()).energy, 1e-14);
  EXPECT_NEAR(spec.level(spec.ground_level()).energy, 0.0, 1e-14);
}

TEST(OccupationString, Format) {
  const auto& spec = spectrum(4);
  OccupationState s;
  s.occupations = {{spec.ground_level(), 2}};
  EXPECT_EQ(occupation_string(s, spec), "0:0\xC3\x97" "2");
}
