#include <doctest.h>

#include "reference_oracles.hpp"
#include "umbra/checkpoint.hpp"
#include "umbra/ops.hpp"
#include "umbra/tensor.hpp"

using namespace umbra;

namespace {

Tensor rand_tensor(std::vector<int> shape, std::mt19937_64& rng, bool requires_grad = true,
                   double lo = -1.0, double hi = 1.0) {
    return Tensor::from_data(shape, oracle::random_vec(shape_numel(shape), rng, lo, hi),
                             requires_grad);
}

// Scalar loss sum_i w_i * t_i with a fixed random weight per element, so
// every output position contributes a distinct nonzero term.
Tensor weighted_sum(const Tensor& t, const std::vector<double>& w) {
    Tensor row = ops::reshape(t, {1, (int)t.size()});
    Tensor wt = Tensor::from_data({(int)t.size(), 1}, w);
    return ops::matmul(row, wt);
}

}  // namespace

TEST_CASE("backward accumulates across shared nodes (diamond)") {
    Tensor x = Tensor::from_data({2}, {3.0, -2.0}, true);
    Tensor y = ops::add(x, x);  // y = 2x
    Tensor loss = weighted_sum(y, {1.0, 1.0});
    loss.backward();
    CHECK(x.grad()[0] == 2.0);
    CHECK(x.grad()[1] == 2.0);
}

TEST_CASE("per-op gradients match central finite differences") {
    std::mt19937_64 rng(31);
    const double tol = 1e-5;

    SUBCASE("add / mul / affine / signed_normalize") {
        Tensor a = rand_tensor({3, 4}, rng);
        Tensor b = rand_tensor({3, 4}, rng);
        auto w = oracle::random_vec(12, rng);
        auto build = [&] {
            Tensor s = ops::mul(ops::add(a, b), b);
            s = ops::affine(s, 1.3, -0.2);
            return weighted_sum(s, w);
        };
        Tensor loss = build();
        loss.backward();
        CHECK(oracle::fd_max_rel_err(build, a) < tol);
        CHECK(oracle::fd_max_rel_err(build, b) < tol);

        Tensor raw = rand_tensor({2, 3}, rng, true, 0.0, 255.0);
        auto w6 = oracle::random_vec(6, rng);
        auto build2 = [&] { return weighted_sum(ops::signed_normalize(raw), w6); };
        CHECK(oracle::fd_max_rel_err(build2, raw) < tol);
    }

    SUBCASE("gelu") {
        Tensor x = rand_tensor({4, 3}, rng, true, -2.0, 2.0);
        auto w = oracle::random_vec(12, rng);
        auto build = [&] { return weighted_sum(ops::gelu(x), w); };
        CHECK(oracle::fd_max_rel_err(build, x) < tol);
    }

    SUBCASE("matmul / matmul_nt / add_rowvec") {
        Tensor a = rand_tensor({3, 5}, rng);
        Tensor b = rand_tensor({5, 4}, rng);
        Tensor c = rand_tensor({6, 4}, rng);
        Tensor bias = rand_tensor({6}, rng);
        auto w = oracle::random_vec(18, rng);
        auto build = [&] {
            Tensor y = ops::matmul(a, b);        // [3,4]
            Tensor z = ops::matmul_nt(y, c);     // [3,6]
            return weighted_sum(ops::add_rowvec(z, bias), w);
        };
        CHECK(oracle::fd_max_rel_err(build, a) < tol);
        CHECK(oracle::fd_max_rel_err(build, b) < tol);
        CHECK(oracle::fd_max_rel_err(build, c) < tol);
        CHECK(oracle::fd_max_rel_err(build, bias) < tol);
    }

    SUBCASE("softmax rows") {
        Tensor x = rand_tensor({4, 6}, rng, true, -2.0, 2.0);
        auto w = oracle::random_vec(24, rng);
        auto build = [&] { return weighted_sum(ops::softmax_rows(x), w); };
        CHECK(oracle::fd_max_rel_err(build, x) < tol);
    }

    SUBCASE("layer_norm") {
        Tensor x = rand_tensor({5, 8}, rng);
        Tensor gamma = rand_tensor({8}, rng, true, 0.5, 1.5);
        Tensor beta = rand_tensor({8}, rng);
        auto w = oracle::random_vec(40, rng);
        auto build = [&] { return weighted_sum(ops::layer_norm(x, gamma, beta), w); };
        CHECK(oracle::fd_max_rel_err(build, x) < tol);
        CHECK(oracle::fd_max_rel_err(build, gamma) < tol);
        CHECK(oracle::fd_max_rel_err(build, beta) < tol);
    }

    SUBCASE("slice / concat / chw_to_tokens / fold_tokens") {
        Tensor x = rand_tensor({6, 8}, rng);
        auto w = oracle::random_vec(48, rng);
        auto build = [&] {
            Tensor left = ops::slice_cols(x, 0, 3);
            Tensor right = ops::slice_cols(x, 3, 8);
            return weighted_sum(ops::concat_cols({right, left}), w);
        };
        CHECK(oracle::fd_max_rel_err(build, x) < tol);

        Tensor img = rand_tensor({2, 3, 4}, rng);
        auto w2 = oracle::random_vec(24, rng);
        auto build2 = [&] { return weighted_sum(ops::chw_to_tokens(img), w2); };
        CHECK(oracle::fd_max_rel_err(build2, img) < tol);

        Tensor toks = rand_tensor({4, 12}, rng);  // p=2, grid 2x2, 3 channels
        auto w3 = oracle::random_vec(48, rng);
        auto build3 = [&] { return weighted_sum(ops::fold_tokens(toks, 2, 2, 2, 3), w3); };
        CHECK(oracle::fd_max_rel_err(build3, toks) < tol);
    }

    SUBCASE("conv2d vs naive oracle, values and gradients") {
        const int cin = 3, h = 8, wd = 8, cout = 5;
        Tensor x = rand_tensor({cin, h, wd}, rng);
        Tensor k = rand_tensor({cout, cin, 3, 3}, rng);
        Tensor b = rand_tensor({cout}, rng);
        for (int stride : {1, 2, 4}) {
            Tensor y = ops::conv2d(x, k, b, stride, 1);
            auto expect = oracle::conv2d(x.value(), cin, h, wd, k.value(), cout, 3, 3,
                                         b.value(), stride, 1);
            REQUIRE(y.size() == expect.size());
            for (std::size_t i = 0; i < expect.size(); ++i)
                CHECK(std::fabs(y.value()[i] - expect[i]) < 1e-10);

            auto w = oracle::random_vec(y.size(), rng);
            auto build = [&] { return weighted_sum(ops::conv2d(x, k, b, stride, 1), w); };
            CHECK(oracle::fd_max_rel_err(build, x) < tol);
            CHECK(oracle::fd_max_rel_err(build, k) < tol);
            CHECK(oracle::fd_max_rel_err(build, b) < tol);
        }
    }

    SUBCASE("mul_plane and region_reweight") {
        UnitMask ms{3, 4, {1, 0, 1, 0, 0, 1, 1, 0, 1, 1, 0, 0}};
        Tensor x = rand_tensor({2, 3, 4}, rng);
        Tensor w1 = Tensor::scalar(2.5, true);
        Tensor w2 = Tensor::scalar(1.0, true);
        auto w = oracle::random_vec(24, rng);
        auto build = [&] { return weighted_sum(ops::region_reweight(x, ms, w1, w2), w); };
        CHECK(oracle::fd_max_rel_err(build, x) < tol);
        CHECK(oracle::fd_max_rel_err(build, w1) < tol);
        CHECK(oracle::fd_max_rel_err(build, w2) < tol);

        auto plane = oracle::random_vec(12, rng);
        auto build2 = [&] { return weighted_sum(ops::mul_plane(x, plane), w); };
        CHECK(oracle::fd_max_rel_err(build2, x) < tol);
    }

    SUBCASE("l1_loss") {
        Tensor a = rand_tensor({3, 5}, rng);
        Tensor b = rand_tensor({3, 5}, rng);
        auto build = [&] { return ops::l1_loss(a, b); };
        CHECK(oracle::fd_max_rel_err(build, a) < tol);
        CHECK(oracle::fd_max_rel_err(build, b) < tol);

        Tensor same = Tensor::from_data({2}, {1.0, 2.0});
        CHECK(ops::l1_loss(same, same).item() == 0.0);
        Tensor shifted = Tensor::from_data({2}, {2.0, 3.0});
        CHECK(ops::l1_loss(shifted, same).item() == 1.0);
    }
}

TEST_CASE("l1 matches naive mean absolute difference") {
    std::mt19937_64 rng(33);
    Tensor a = rand_tensor({7, 11}, rng, false);
    Tensor b = rand_tensor({7, 11}, rng, false);
    double naive = 0;
    for (std::size_t i = 0; i < a.size(); ++i) naive += std::fabs(a.value()[i] - b.value()[i]);
    naive /= (double)a.size();
    CHECK(std::fabs(ops::l1_loss(a, b).item() - naive) < 1e-12);
}

TEST_CASE("softmax rows sum to one") {
    std::mt19937_64 rng(34);
    Tensor x = rand_tensor({8, 16}, rng, false, -30.0, 30.0);
    Tensor p = ops::softmax_rows(x);
    for (int i = 0; i < 8; ++i) {
        double s = 0;
        for (int j = 0; j < 16; ++j) s += p.value()[(std::size_t)i * 16 + j];
        CHECK(std::fabs(s - 1.0) < 1e-10);
    }
}

TEST_CASE("layer_norm trivial cases") {
    SUBCASE("constant token becomes beta") {
        Tensor x = Tensor::from_data({1, 4}, {3.0, 3.0, 3.0, 3.0});
        Tensor gamma = Tensor::from_data({4}, {1, 1, 1, 1});
        Tensor beta = Tensor::from_data({4}, {0.5, -0.5, 2.0, 0.0});
        Tensor y = ops::layer_norm(x, gamma, beta);
        for (int j = 0; j < 4; ++j)
            CHECK(y.value()[j] == doctest::Approx(beta.value()[j]).epsilon(1e-9));
    }
    SUBCASE("two-point token (1,-1) maps to (1,-1)/sqrt(1+eps)") {
        Tensor x = Tensor::from_data({1, 2}, {1.0, -1.0});
        Tensor gamma = Tensor::from_data({2}, {1, 1});
        Tensor beta = Tensor::from_data({2}, {0, 0});
        Tensor y = ops::layer_norm(x, gamma, beta);
        const double expect = 1.0 / std::sqrt(1.0 + 1e-5);
        CHECK(y.value()[0] == doctest::Approx(expect).epsilon(1e-12));
        CHECK(y.value()[1] == doctest::Approx(-expect).epsilon(1e-12));
    }
}
