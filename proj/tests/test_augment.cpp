#include <algorithm>
#include <array>
#include <set>
#include <stdexcept>
#include <tuple>
#include <vector>

#include <doctest.h>

#include "flowsr/augment.hpp"
#include "oracles.hpp"

using namespace flowsr;

namespace {

std::size_t index_of_symmetry(const CubeSymmetry& g) {
    const auto all = all_symmetries();
    const auto it = std::find(all.begin(), all.end(), g);
    REQUIRE(it != all.end());
    return static_cast<std::size_t>(it - all.begin());
}

ScalarField3D momentum_divergence(const FlowState& s) {
    std::array<ScalarField3D, 3> m;
    for (int k = 0; k < 3; ++k) {
        m[k] = s.u[k];
        for (std::size_t i = 0; i < m[k].values.size(); ++i)
            m[k].values[i] *= s.rho.values[i];
    }
    return divergence(m[0], m[1], m[2]);
}

}  // namespace

TEST_CASE("CubeSymmetry basics") {
    SUBCASE("validation") {
        CHECK_NOTHROW(CubeSymmetry{}.validate());
        CHECK_NOTHROW(CubeSymmetry{{2, 0, 1}, {-1, 1, -1}}.validate());
        CHECK_THROWS_AS((CubeSymmetry{{0, 0, 2}, {1, 1, 1}}.validate()), std::invalid_argument);
        CHECK_THROWS_AS((CubeSymmetry{{0, 1, 3}, {1, 1, 1}}.validate()), std::invalid_argument);
        CHECK_THROWS_AS((CubeSymmetry{{0, 1, 2}, {1, 0, 1}}.validate()), std::invalid_argument);
        CHECK_THROWS_AS((CubeSymmetry{{0, 1, 2}, {1, 1, 2}}.validate()), std::invalid_argument);
    }

    SUBCASE("rotation detection matches the determinant") {
        CHECK(CubeSymmetry::identity().is_rotation());
        CHECK_FALSE(CubeSymmetry{{0, 1, 2}, {-1, 1, 1}}.is_rotation());   // mirror
        CHECK(CubeSymmetry{{0, 1, 2}, {-1, -1, 1}}.is_rotation());        // 180-deg turn
        CHECK_FALSE(CubeSymmetry{{1, 0, 2}, {1, 1, 1}}.is_rotation());    // axis swap
        CHECK(CubeSymmetry{{1, 0, 2}, {-1, 1, 1}}.is_rotation());         // 90-deg turn
        CHECK(CubeSymmetry{{1, 2, 0}, {1, 1, 1}}.is_rotation());          // cyclic
    }

    SUBCASE("exactly 24 of the 48 elements are rotations") {
        const auto all = all_symmetries();
        CHECK(std::count_if(all.begin(), all.end(),
                            [](const CubeSymmetry& g) { return g.is_rotation(); }) == 24);
    }

    SUBCASE("inverse composes to the identity on both sides") {
        for (const CubeSymmetry& g : all_symmetries()) {
            CHECK(compose(g.inverse(), g) == CubeSymmetry::identity());
            CHECK(compose(g, g.inverse()) == CubeSymmetry::identity());
        }
    }
}

TEST_CASE("all_symmetries enumeration") {
    const auto all = all_symmetries();

    SUBCASE("element 0 is the identity and all are valid") {
        CHECK(all[0] == CubeSymmetry::identity());
        for (const CubeSymmetry& g : all) CHECK_NOTHROW(g.validate());
    }

    SUBCASE("48 distinct elements, 8 sign patterns per permutation") {
        std::set<std::tuple<int, int, int, int, int, int>> seen;
        std::array<int, 6> per_perm{};
        constexpr std::array<std::array<int, 3>, 6> kPerms = {{
            {0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0},
        }};
        for (const CubeSymmetry& g : all) {
            seen.insert({g.perm[0], g.perm[1], g.perm[2], g.signs[0], g.signs[1], g.signs[2]});
            const auto it = std::find(kPerms.begin(), kPerms.end(), g.perm);
            REQUIRE(it != kPerms.end());
            ++per_perm[static_cast<std::size_t>(it - kPerms.begin())];
        }
        CHECK(seen.size() == 48);
        for (int c : per_perm) CHECK(c == 8);
    }

    SUBCASE("closed under composition") {
        // spot-check closure: products of a generating pair stay in the table
        const CubeSymmetry a{{1, 2, 0}, {1, 1, 1}};
        const CubeSymmetry b{{0, 1, 2}, {-1, 1, 1}};
        CubeSymmetry g = CubeSymmetry::identity();
        for (int step = 0; step < 12; ++step) {
            g = compose(step % 2 == 0 ? a : b, g);
            CHECK(index_of_symmetry(g) < 48);
        }
    }
}

TEST_CASE("random_symmetry") {
    SUBCASE("identical seeds replay the identical sequence") {
        std::mt19937_64 g1(42), g2(42);
        for (int i = 0; i < 20; ++i) CHECK(random_symmetry(g1) == random_symmetry(g2));
    }

    SUBCASE("seed overload equals a fresh generator") {
        std::mt19937_64 gen(7);
        CHECK(random_symmetry(std::uint64_t{7}) == random_symmetry(gen));
        std::mt19937_64 gen2(7);
        CHECK(random_symmetry(std::uint64_t{7}, true) == random_symmetry(gen2, true));
    }

    SUBCASE("rotations_only draws proper rotations exclusively") {
        std::mt19937_64 gen(9);
        for (int i = 0; i < 200; ++i) CHECK(random_symmetry(gen, true).is_rotation());
    }

    SUBCASE("draws cover all 48 elements roughly uniformly") {
        std::mt19937_64 gen(1234);
        std::array<int, 48> counts{};
        const int draws = 48000;
        for (int i = 0; i < draws; ++i) ++counts[index_of_symmetry(random_symmetry(gen))];
        for (int c : counts) {
            CHECK(c > 850);
            CHECK(c < 1150);
        }
    }
}

TEST_CASE("apply on scalar fields") {
    const GridSpec g{4, 4, 4, 1.0};
    std::mt19937_64 gen(21);
    const ScalarField3D f = oracles::random_field(g, gen);

    SUBCASE("identity is a no-op") {
        const ScalarField3D out = apply(f, CubeSymmetry::identity());
        CHECK(out.values == f.values);
        CHECK(out.unit == f.unit);
    }

    SUBCASE("x flip reverses the x index") {
        const CubeSymmetry flip{{0, 1, 2}, {-1, 1, 1}};
        const ScalarField3D out = apply(f, flip);
        for (int x = 0; x < 4; ++x)
            for (int y = 0; y < 4; ++y)
                for (int z = 0; z < 4; ++z) CHECK(out(x, y, z) == f(3 - x, y, z));
    }

    SUBCASE("axis swap transposes indices") {
        const CubeSymmetry swap_xy{{1, 0, 2}, {1, 1, 1}};
        const ScalarField3D out = apply(f, swap_xy);
        for (int x = 0; x < 4; ++x)
            for (int y = 0; y < 4; ++y)
                for (int z = 0; z < 4; ++z) CHECK(out(x, y, z) == f(y, x, z));
    }

    SUBCASE("values are permuted, never altered") {
        for (const CubeSymmetry& sym : all_symmetries()) {
            ScalarField3D out = apply(f, sym);
            std::vector<double> a = out.values, b = f.values;
            std::sort(a.begin(), a.end());
            std::sort(b.begin(), b.end());
            CHECK(a == b);
        }
    }

    SUBCASE("axis-permuting elements demand a cubic grid, flips do not") {
        std::mt19937_64 gen2(22);
        const ScalarField3D rect = oracles::random_field(GridSpec{4, 4, 6, 1.0}, gen2);
        CHECK_THROWS_AS(apply(rect, CubeSymmetry{{1, 0, 2}, {1, 1, 1}}),
                        std::invalid_argument);
        const ScalarField3D flipped = apply(rect, CubeSymmetry{{0, 1, 2}, {1, -1, 1}});
        CHECK(flipped(0, 0, 0) == rect(0, 3, 0));
    }
}

TEST_CASE("apply on flow states") {
    const GridSpec g{4, 4, 4, 1.0};
    const FlowState s = oracles::random_state(g, 31);

    SUBCASE("x flip negates and reverses u_x, only reverses u_y and u_z") {
        const CubeSymmetry flip{{0, 1, 2}, {-1, 1, 1}};
        const FlowState out = apply(s, flip);
        for (int x = 0; x < 4; ++x)
            for (int y = 0; y < 4; ++y)
                for (int z = 0; z < 4; ++z) {
                    CHECK(out.rho(x, y, z) == s.rho(3 - x, y, z));
                    CHECK(out.u[0](x, y, z) == -s.u[0](3 - x, y, z));
                    CHECK(out.u[1](x, y, z) == s.u[1](3 - x, y, z));
                    CHECK(out.u[2](x, y, z) == s.u[2](3 - x, y, z));
                }
    }

    SUBCASE("axis swap exchanges velocity components along with indices") {
        const CubeSymmetry swap_xy{{1, 0, 2}, {1, 1, 1}};
        const FlowState out = apply(s, swap_xy);
        for (int x = 0; x < 4; ++x)
            for (int y = 0; y < 4; ++y)
                for (int z = 0; z < 4; ++z) {
                    CHECK(out.u[0](x, y, z) == s.u[1](y, x, z));
                    CHECK(out.u[1](x, y, z) == s.u[0](y, x, z));
                    CHECK(out.u[2](x, y, z) == s.u[2](y, x, z));
                }
    }

    SUBCASE("group law: acting by a product equals acting twice") {
        std::mt19937_64 gen(32);
        for (int trial = 0; trial < 16; ++trial) {
            const CubeSymmetry ga = random_symmetry(gen);
            const CubeSymmetry gb = random_symmetry(gen);
            const FlowState once = apply(s, compose(gb, ga));
            const FlowState twice = apply(apply(s, ga), gb);
            CHECK(once.rho.values == twice.rho.values);
            for (int k = 0; k < 3; ++k) CHECK(once.u[k].values == twice.u[k].values);
        }
    }

    SUBCASE("inverse undoes the transform bit for bit") {
        for (const CubeSymmetry& sym : all_symmetries()) {
            const FlowState back = apply(apply(s, sym), sym.inverse());
            CHECK(back.rho.values == s.rho.values);
            for (int k = 0; k < 3; ++k) CHECK(back.u[k].values == s.u[k].values);
        }
    }

    SUBCASE("density stays positive under every element") {
        for (const CubeSymmetry& sym : all_symmetries()) {
            const FlowState out = apply(s, sym);
            CHECK_NOTHROW(out.validate());
        }
    }
}

TEST_CASE("verify_continuity") {
    const FlowState s = oracles::random_state(GridSpec{12, 12, 12, 0.5}, 41);

    SUBCASE("identity deviation is exactly zero") {
        CHECK(verify_continuity(s, CubeSymmetry::identity()) == 0.0);
    }

    SUBCASE("all 48 elements commute with the continuity operator") {
        for (const CubeSymmetry& sym : all_symmetries())
            CHECK(verify_continuity(s, sym) < 1e-10);
    }

    SUBCASE("a transform that forgets the velocity sign is caught") {
        const CubeSymmetry flip{{0, 1, 2}, {-1, 1, 1}};
        FlowState wrong;
        wrong.rho = apply(s.rho, flip);
        // gather the components as plain scalars: u_x keeps its sign, which
        // breaks equivariance of div(rho u)
        for (int k = 0; k < 3; ++k) wrong.u[k] = apply(s.u[k], flip);

        const ScalarField3D mapped = apply(momentum_divergence(s), flip);
        const ScalarField3D recomputed = momentum_divergence(wrong);
        double max_dev = 0.0;
        for (int x = 1; x < 11; ++x)
            for (int y = 1; y < 11; ++y)
                for (int z = 1; z < 11; ++z)
                    max_dev = std::max(max_dev,
                                       std::abs(mapped(x, y, z) - recomputed(x, y, z)));
        CHECK(max_dev > 1e-3);
    }

    SUBCASE("too-small grids are rejected") {
        const FlowState tiny = oracles::random_state(GridSpec{2, 2, 2, 1.0}, 42);
        CHECK_THROWS_AS(verify_continuity(tiny, CubeSymmetry::identity()),
                        std::invalid_argument);
    }
}
