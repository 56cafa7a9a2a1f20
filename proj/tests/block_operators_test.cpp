// Copyright 2026 The qtraj Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "qtraj/block_operators.hpp"
#include "support/dense_fock.hpp"
#include "support/helpers.hpp"

using namespace qtraj;

namespace {

std::vector<double> alpha_grid() {
    std::vector<double> out;
    for (int k = 0; k < 64; ++k) {
        out.push_back(-2.0 * M_PI + 4.0 * M_PI * (k + 0.37) / 64.0);
    }
    return out;
}

double max_abs(const Eigen::MatrixXcd &m) {
    return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

Matrix8 embed_sectors(const Matrix3 &m1, const Matrix3 &m2) {
    Matrix8 k = Matrix8::Zero();
    for (int a = 0; a < 3; ++a) {
        for (int b = 0; b < 3; ++b) {
            k(kSectorLocal[0][a], kSectorLocal[0][b]) = m1(a, b);
            k(kSectorLocal[1][a], kSectorLocal[1][b]) = m2(a, b);
        }
    }
    return k;
}

}  // namespace

TEST(BlockChannel, OneBodyMatricesAsWritten) {
    const double t = 0.37;
    const double c = std::cos(t);
    const double s = std::sin(t);
    const cdouble d(0.0, -s / std::sqrt(2.0));
    BlockChannel ch = build_channel(ModelKind::OneBody, t);
    Matrix3 up1;
    up1 << c, 0, 0, 0, (1 + c) / 2, (c - 1) / 2, 0, (c - 1) / 2, (1 + c) / 2;
    Matrix3 down1;
    down1 << 0, d, d, d, 0, 0, d, 0, 0;
    Matrix3 up2;
    up2 << (1 + c) / 2, (c - 1) / 2, 0, (c - 1) / 2, (1 + c) / 2, 0, 0, 0, c;
    Matrix3 down2;
    down2 << 0, 0, d, 0, 0, d, d, d, 0;
    EXPECT_LT(max_abs(ch.up[0] - up1), 1e-15);
    EXPECT_LT(max_abs(ch.down[0] - down1), 1e-15);
    EXPECT_LT(max_abs(ch.up[1] - up2), 1e-15);
    EXPECT_LT(max_abs(ch.down[1] - down2), 1e-15);
}

TEST(BlockChannel, ThreeBodyMatricesAsWritten) {
    const double t = 1.23;
    const double c = std::cos(t);
    const cdouble d(0.0, -std::sin(t) / std::sqrt(2.0));
    BlockChannel ch = build_channel(ModelKind::ThreeBody, t);
    Matrix3 up1 = Matrix3::Identity();
    up1(0, 0) = c;
    Matrix3 down1 = Matrix3::Zero();
    down1(1, 0) = d;
    down1(2, 0) = d;
    Matrix3 up2 = Matrix3::Identity();
    up2(2, 2) = c;
    Matrix3 down2 = Matrix3::Zero();
    down2(0, 2) = d;
    down2(1, 2) = d;
    EXPECT_LT(max_abs(ch.up[0] - up1), 1e-15);
    EXPECT_LT(max_abs(ch.down[0] - down1), 1e-15);
    EXPECT_LT(max_abs(ch.up[1] - up2), 1e-15);
    EXPECT_LT(max_abs(ch.down[1] - down2), 1e-15);
}

TEST(BlockChannel, SpecialAngles) {
    BlockChannel zero = build_channel(ModelKind::OneBody, 0.0);
    EXPECT_LT(max_abs(zero.full_kraus(Outcome::Up) - Matrix8::Identity()), 1e-15);
    EXPECT_LT(max_abs(zero.full_kraus(Outcome::Down)), 1e-15);

    BlockChannel half = build_channel(ModelKind::OneBody, M_PI / 2);
    Matrix3 proj;
    proj << 0, 0, 0, 0, 0.5, -0.5, 0, -0.5, 0.5;
    EXPECT_LT(max_abs(half.up[0] - proj), 1e-15);

    BlockChannel quarter = build_channel(ModelKind::ThreeBody, M_PI / 4);
    Matrix3 diag = Matrix3::Identity();
    diag(0, 0) = std::sqrt(2.0) / 2;
    EXPECT_LT(max_abs(quarter.up[0] - diag), 1e-15);
}

TEST(BlockChannel, ClosedFormsMatchExponentiation) {
    for (ModelKind m : {ModelKind::OneBody, ModelKind::ThreeBody}) {
        for (double t : alpha_grid()) {
            EXPECT_LT(exponentiation_residual(build_channel(m, t), BlockOrdering::Bulk, +1), 1e-12);
            for (int r : {+1, -1}) {
                EXPECT_LT(exponentiation_residual(build_channel(m, t, boundary_signs(r)), BlockOrdering::Boundary, r), 1e-12);
            }
        }
    }
}

TEST(BlockChannel, CompletenessAndUnitarity) {
    for (ModelKind m : {ModelKind::OneBody, ModelKind::ThreeBody}) {
        for (double t : alpha_grid()) {
            for (HopSigns s : {HopSigns{1, 1}, HopSigns{1, -1}, HopSigns{-1, 1}}) {
                BlockChannel ch = build_channel(m, t, s);
                EXPECT_LT(completeness_residual(ch), 1e-12);
                Matrix8 sum = ch.full_kraus(Outcome::Up).adjoint() * ch.full_kraus(Outcome::Up) +
                              ch.full_kraus(Outcome::Down).adjoint() * ch.full_kraus(Outcome::Down);
                EXPECT_LT(max_abs(sum - Matrix8::Identity()), 1e-12);
            }
            for (auto ord : {BlockOrdering::Bulk, BlockOrdering::Boundary}) {
                for (int r : {+1, -1}) {
                    Matrix16 u = block_unitary(m, t, ord, r);
                    EXPECT_LT(max_abs(u.adjoint() * u - Matrix16::Identity()), 1e-12);
                    Eigen::Matrix<cdouble, 16, 8> iso;
                    for (int j = 0; j < 8; ++j) {
                        iso.col(j) = u.col(2 * j);
                    }
                    EXPECT_LT(max_abs(iso.adjoint() * iso - Matrix8::Identity()), 1e-12);
                }
            }
        }
    }
}

TEST(BlockChannel, Periodicity) {
    for (ModelKind m : {ModelKind::OneBody, ModelKind::ThreeBody}) {
        for (double t : alpha_grid()) {
            BlockChannel a = build_channel(m, t);
            BlockChannel b = build_channel(m, t + 2 * M_PI);
            BlockChannel c = build_channel(m, t + M_PI);
            for (Outcome o : {Outcome::Up, Outcome::Down}) {
                EXPECT_LT(max_abs(a.full_kraus(o) - b.full_kraus(o)), 1e-12);
            }
            // alpha -> alpha + pi flips cos and sin: K_down -> -K_down, and the Born weights are unchanged.
            for (int k = 0; k < 2; ++k) {
                EXPECT_LT(max_abs(a.down[k] + c.down[k]), 1e-12);
                EXPECT_LT(max_abs(a.gram_down[k] - c.gram_down[k]), 1e-12);
            }
        }
    }
}

TEST(BlockChannel, ParticleHoleSymmetry) {
    for (ModelKind m : {ModelKind::OneBody, ModelKind::ThreeBody}) {
        for (double t : alpha_grid()) {
            BlockChannel ch = build_channel(m, t);
            for (Outcome o : {Outcome::Up, Outcome::Down}) {
                const Matrix3 &k1 = ch.kraus(0, o);
                const Matrix3 &k2 = ch.kraus(1, o);
                for (int a = 0; a < 3; ++a) {
                    for (int b = 0; b < 3; ++b) {
                        EXPECT_NEAR(std::abs(k2(kParticleHole[a], kParticleHole[b]) - k1(a, b)), 0.0, 1e-15);
                    }
                }
            }
        }
    }
}

TEST(BlockChannel, MeasuredOperatorBreaksGaussianity) {
    Matrix8 m = embed_sectors(hopping_observable(1), hopping_observable(2));
    EXPECT_GT((m * m - m).norm(), 0.5);
    EXPECT_GT((m * m - Matrix8::Identity()).norm(), 0.5);
}

TEST(ChannelSet, ValidatesInput) {
    EXPECT_THROW(make_channel_set(ModelKind::OneBody, std::numeric_limits<double>::quiet_NaN(), Convention::BlockLocal), ConfigError);
    EXPECT_THROW(make_channel_set(ModelKind::OneBody, std::numeric_limits<double>::infinity(), Convention::JwExact), ConfigError);
    ChannelSet jw = make_channel_set(ModelKind::OneBody, 0.9, Convention::JwExact);
    EXPECT_EQ(jw.boundary[0].signs, (HopSigns{+1, -1}));
    EXPECT_EQ(jw.boundary[1].signs, (HopSigns{-1, +1}));
    ChannelSet bl = make_channel_set(ModelKind::OneBody, 0.9, Convention::BlockLocal);
    EXPECT_EQ(bl.boundary[0].signs, (HopSigns{+1, +1}));
    EXPECT_EQ(bl.boundary[1].signs, (HopSigns{+1, +1}));
}

TEST(Projectors, SectorOneAsWritten) {
    auto p = projective_kraus(1);
    ASSERT_EQ(p.size(), 3u);
    Matrix3 p0;
    p0 << 0, 0, 0, 0, 0.5, -0.5, 0, -0.5, 0.5;
    const double r = 1.0 / (2.0 * std::sqrt(2.0));
    Matrix3 pp;
    pp << 0.5, r, r, r, 0.25, 0.25, r, 0.25, 0.25;
    Matrix3 pm;
    pm << 0.5, -r, -r, -r, 0.25, 0.25, -r, 0.25, 0.25;
    EXPECT_LT(max_abs(p[0] - p0), 1e-15);
    EXPECT_LT(max_abs(p[+1] - pp), 1e-15);
    EXPECT_LT(max_abs(p[-1] - pm), 1e-15);
}

TEST(Projectors, IdempotentCompleteEigenprojectors) {
    for (int sector : {1, 2}) {
        auto p = projective_kraus(sector);
        Matrix3 m = hopping_observable(sector);
        Matrix3 sum = Matrix3::Zero();
        for (auto &[key, proj] : p) {
            EXPECT_LT(max_abs(proj * proj - proj), 1e-15);
            EXPECT_LT(max_abs(proj.adjoint() * proj - proj), 1e-15);
            double lambda = key * std::sqrt(2.0);
            EXPECT_LT(max_abs(m * proj - lambda * proj), 1e-15);
            sum += proj.adjoint() * proj;
        }
        EXPECT_LT(max_abs(sum - Matrix3::Identity()), 1e-15);
    }
    EXPECT_THROW(projective_kraus(0), ConfigError);
}

TEST(Projectors, SectorTwoMatchesEigendecomposition) {
    Eigen::SelfAdjointEigenSolver<Matrix3> es(hopping_observable(2));
    auto p = projective_kraus(2);
    const int keys[3] = {-1, 0, +1};
    for (int k = 0; k < 3; ++k) {
        EXPECT_NEAR(es.eigenvalues()[k], keys[k] * std::sqrt(2.0), 1e-14);
        Eigen::Vector3cd v = es.eigenvectors().col(k);
        Matrix3 proj = v * v.adjoint();
        EXPECT_LT(max_abs(proj - p[keys[k]]), 1e-14);
    }
}

TEST(Projectors, OneBodyNoClickAtHalfPi) {
    for (double t : {M_PI / 2, -M_PI / 2, 3 * M_PI / 2}) {
        BlockChannel ch = build_channel(ModelKind::OneBody, t);
        for (int sector : {1, 2}) {
            Matrix3 p0 = projective_kraus(sector)[0];
            EXPECT_LT(max_abs(ch.up[sector - 1] - p0), 1e-15);
        }
    }
}

namespace {

struct Fixture {
    std::shared_ptr<const FockBasis> basis = enumerate_basis(8);
    ModeLayout lay{8};
};

StateVector block_state(const Fixture &f, const std::string &main, const std::string &anc) {
    return StateVector::basis_state(f.basis, f.lay.word_from_strings(main, anc));
}

}  // namespace

TEST(ApplyBlock, OneBodyHalfPiAncillaClicks) {
    Fixture f;
    ChannelSet ch = make_channel_set(ModelKind::OneBody, M_PI / 2, Convention::BlockLocal);
    // Block 1 holds (c_1, c_2, a_1) = (0, 0, 1).
    StateVector s = block_state(f, "0011", "1100");
    auto [up, down] = apply_block(s, block_address(f.lay, 1), ch);
    EXPECT_NEAR(up.prob, 0.0, 1e-15);
    EXPECT_NEAR(down.prob, 1.0, 1e-15);
    const cdouble amp(0.0, -1.0 / std::sqrt(2.0));
    EXPECT_NEAR(std::abs(down.state.amplitude(f.lay.word_from_strings("0111", "0100")) - amp), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(down.state.amplitude(f.lay.word_from_strings("1011", "0100")) - amp), 0.0, 1e-15);
}

TEST(ApplyBlock, ThreeBodyLeavesSingleMainParticle) {
    Fixture f;
    ChannelSet ch = make_channel_set(ModelKind::ThreeBody, 0.8, Convention::BlockLocal);
    // Block 1 holds (0, 1, 0).
    StateVector s = block_state(f, "0111", "0001");
    auto [up, down] = apply_block(s, block_address(f.lay, 1), ch);
    EXPECT_NEAR(up.prob, 1.0, 1e-15);
    EXPECT_NEAR(down.prob, 0.0, 1e-15);
    EXPECT_NEAR((up.state.amps - s.amps).norm(), 0.0, 1e-15);
}

TEST(ApplyBlock, EmptyAndFullBlocksAreInert) {
    Fixture f;
    ChannelSet ch = make_channel_set(ModelKind::OneBody, 1.1, Convention::JwExact);
    StateVector empty = block_state(f, "0011", "0011");
    StateVector full = block_state(f, "1100", "1001");
    for (const StateVector *s : {&empty, &full}) {
        auto [up, down] = apply_block(*s, block_address(f.lay, 1), ch);
        EXPECT_NEAR(up.prob, 1.0, 1e-15);
        EXPECT_NEAR((up.state.amps - s->amps).norm(), 0.0, 1e-15);
        EXPECT_NEAR(down.state.amps.norm(), 0.0, 1e-15);
    }
}

TEST(ApplyBlock, OneBodyPiSwapsWithSign) {
    Fixture f;
    ChannelSet ch = make_channel_set(ModelKind::OneBody, M_PI, Convention::BlockLocal);
    // Block 1 holds (0, 1, 0); the result is -|(1, 0, 0)>.
    StateVector s = block_state(f, "0111", "0001");
    auto [up, down] = apply_block(s, block_address(f.lay, 1), ch);
    EXPECT_NEAR(up.prob, 1.0, 1e-14);
    EXPECT_NEAR(std::abs(up.state.amplitude(f.lay.word_from_strings("1011", "0001")) + 1.0), 0.0, 1e-14);
}

TEST(ApplyBlock, RejectsUnnormalizedInput) {
    Fixture f;
    ChannelSet ch = make_channel_set(ModelKind::OneBody, 1.0, Convention::BlockLocal);
    StateVector s = block_state(f, "1111", "0000");
    s.amps *= 1.1;
    EXPECT_THROW(apply_block(s, block_address(f.lay, 1), ch), ConfigError);
}

TEST(ApplyBlock, RandomStatesConserveProbability) {
    Fixture f;
    const auto blocks = all_blocks(f.lay);
    for (ModelKind m : {ModelKind::OneBody, ModelKind::ThreeBody}) {
        for (Convention conv : {Convention::BlockLocal, Convention::JwExact}) {
            ChannelSet ch = make_channel_set(m, 0.77, conv);
            for (int k = 0; k < 1000; ++k) {
                StateVector s = support::random_state(f.basis, 1000 + k);
                const auto &addr = blocks[static_cast<std::size_t>(k) % blocks.size()];
                auto [up, down] = apply_block(s, addr, ch);
                EXPECT_NEAR(up.prob + down.prob, 1.0, 1e-10);
            }
        }
    }
}

TEST(ApplyBlock, ThreeBodyTrivialOnMixedOccupations) {
    Fixture f;
    ChannelSet ch = make_channel_set(ModelKind::ThreeBody, 1.3, Convention::JwExact);
    const auto blocks = all_blocks(f.lay);
    for (const auto &addr : blocks) {
        StateVector s(f.basis);
        for (std::size_t k = 0; k < f.basis->dimension(); ++k) {
            BlockOccupation o = block_occupation(f.basis->state(k), addr);
            // Nontrivial only for empty-main-with-ancilla or full-main-without-ancilla.
            bool active = (o.c == 0 && o.c_next == 0 && o.a == 1) || (o.c == 1 && o.c_next == 1 && o.a == 0);
            if (!active) {
                s.amps[static_cast<Eigen::Index>(k)] = cdouble(std::cos(0.3 * k), std::sin(0.7 * k));
            }
        }
        s.normalize();
        auto [up, down] = apply_block(s, addr, ch);
        EXPECT_NEAR((up.state.amps - s.amps).norm(), 0.0, 1e-14);
        EXPECT_NEAR(down.prob, 0.0, 1e-14);
    }
}

TEST(ApplyBlock, MatchesDenseChainOperators) {
    const int L = 8;
    Fixture f;
    for (bool fermionic : {true, false}) {
        support::DenseFock fock(L, fermionic);
        Convention conv = fermionic ? Convention::JwExact : Convention::BlockLocal;
        for (ModelKind m : {ModelKind::OneBody, ModelKind::ThreeBody}) {
            const double t = 0.61;
            ChannelSet ch = make_channel_set(m, t, conv);
            StateVector s = support::random_state(f.basis, fermionic ? 11 : 12);
            for (int i = 1; i <= L / 2; ++i) {
                auto [dup, ddown] = fock.block_kraus(m, t, i);
                Eigen::MatrixXcd rup = support::restrict_to(dup, *f.basis);
                Eigen::MatrixXcd rdown = support::restrict_to(ddown, *f.basis);
                auto [up, down] = apply_block(s, block_address(f.lay, i), ch);
                EXPECT_LT((rup * s.amps - up.state.amps).norm(), 1e-12) << "block " << i << " fermionic " << fermionic;
                EXPECT_LT((rdown * s.amps - down.state.amps).norm(), 1e-12) << "block " << i << " fermionic " << fermionic;
            }
        }
    }
}

TEST(ApplyBlock, ConventionsDifferOnlyAtBoundary) {
    Fixture f;
    ChannelSet bl = make_channel_set(ModelKind::OneBody, 0.9, Convention::BlockLocal);
    ChannelSet jw = make_channel_set(ModelKind::OneBody, 0.9, Convention::JwExact);
    StateVector s = support::random_state(f.basis, 5);
    for (int i = 1; i < 4; ++i) {
        auto a = apply_block(s, block_address(f.lay, i), bl);
        auto b = apply_block(s, block_address(f.lay, i), jw);
        EXPECT_LT((a.first.state.amps - b.first.state.amps).norm(), 1e-15);
        EXPECT_LT((a.second.state.amps - b.second.state.amps).norm(), 1e-15);
    }
    auto a = apply_block(s, block_address(f.lay, 4), bl);
    auto b = apply_block(s, block_address(f.lay, 4), jw);
    EXPECT_GT((a.first.state.amps - b.first.state.amps).norm(), 1e-3);
}

TEST(BlockKernels, MatchApplyBlock) {
    for (int L : {4, 8, 10}) {
        auto basis = enumerate_basis(L);
        auto tables = build_block_tables(*basis);
        for (ModelKind m : {ModelKind::OneBody, ModelKind::ThreeBody}) {
            for (Convention conv : {Convention::BlockLocal, Convention::JwExact}) {
                ChannelSet ch = make_channel_set(m, 2.1, conv);
                StateVector s = support::random_state(basis, static_cast<std::uint64_t>(L));
                for (const auto &t : tables) {
                    auto [up, down] = apply_block(s, t.addr, ch);
                    BranchProbabilities p = branch_probabilities(s.amps, t, ch);
                    EXPECT_NEAR(p.up, up.prob, 1e-13);
                    EXPECT_NEAR(p.down, down.prob, 1e-13);
                    Eigen::VectorXcd vu = s.amps;
                    apply_branch_inplace(vu, t, ch, Outcome::Up, 2.0);
                    EXPECT_LT((vu - 2.0 * up.state.amps).norm(), 1e-13);
                    Eigen::VectorXcd vd = s.amps;
                    apply_branch_inplace(vd, t, ch, Outcome::Down, 1.0);
                    EXPECT_LT((vd - down.state.amps).norm(), 1e-13);
                }
            }
        }
    }
}

TEST(BlockKernels, TablesPartitionTheBasis) {
    auto basis = enumerate_basis(12);
    for (const auto &t : build_block_tables(*basis)) {
        std::vector<int> seen(basis->dimension(), 0);
        for (auto k : t.trivial) {
            ++seen[k];
        }
        for (const auto &slot : t.orbits) {
            for (const auto &variant : slot) {
                for (const auto &tri : variant) {
                    for (auto k : tri) {
                        ++seen[k];
                    }
                }
            }
        }
        for (int c : seen) {
            EXPECT_EQ(c, 1);
        }
        if (!t.addr.is_boundary) {
            EXPECT_TRUE(t.orbits[0][1].empty());
            EXPECT_TRUE(t.orbits[1][1].empty());
        }
    }
}

TEST(BlockTypes, ParseAndPrint) {
    EXPECT_EQ(parse_model("one-body"), ModelKind::OneBody);
    EXPECT_EQ(parse_model(to_string(ModelKind::ThreeBody)), ModelKind::ThreeBody);
    EXPECT_EQ(parse_convention("jw-exact"), Convention::JwExact);
    EXPECT_EQ(parse_convention(to_string(Convention::BlockLocal)), Convention::BlockLocal);
    EXPECT_THROW(parse_model("two-body"), ConfigError);
    EXPECT_THROW(parse_convention("jw"), ConfigError);
}
