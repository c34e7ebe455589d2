#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstdint>
#include <utility>
#include <vector>

#include "qportfolio/asymptotics.hpp"
#include "qportfolio/errors.hpp"
#include "qportfolio/estimation.hpp"
#include "qportfolio/market_data.hpp"
#include "qportfolio/optimizer.hpp"
#include "qportfolio/qalgebra.hpp"
#include "qportfolio/qgaussian.hpp"
#include "qportfolio/rng.hpp"
#include "qportfolio/wealth_metrics.hpp"

namespace py = pybind11;
using namespace qportfolio;

namespace {

Matrix to_matrix(const py::array_t<double, py::array::c_style | py::array::forcecast>& arr) {
  if (arr.ndim() != 2) throw std::invalid_argument("expected a 2-d array (rows = observations)");
  Matrix m(static_cast<int>(arr.shape(0)), static_cast<int>(arr.shape(1)));
  auto view = arr.unchecked<2>();
  for (py::ssize_t r = 0; r < arr.shape(0); ++r) {
    for (py::ssize_t c = 0; c < arr.shape(1); ++c) {
      m(static_cast<int>(r), static_cast<int>(c)) = view(r, c);
    }
  }
  return m;
}

py::array_t<double> from_matrix(const Matrix& m) {
  py::array_t<double> arr({m.rows(), m.cols()});
  auto view = arr.mutable_unchecked<2>();
  for (int r = 0; r < m.rows(); ++r) {
    for (int c = 0; c < m.cols(); ++c) view(r, c) = m(r, c);
  }
  return arr;
}

IntegratorSpec make_spec(const std::string& method, double rel_tol, double abs_tol,
                         long long max_evaluations, long long mc_samples, std::uint64_t seed) {
  IntegratorSpec spec;
  if (method == "adaptive_quadrature_1d") {
    spec.method = IntegrationMethod::adaptive_quadrature_1d;
  } else if (method == "cubature_nd") {
    spec.method = IntegrationMethod::cubature_nd;
  } else if (method == "monte_carlo") {
    spec.method = IntegrationMethod::monte_carlo;
  } else {
    throw std::invalid_argument("method must be adaptive_quadrature_1d, cubature_nd or monte_carlo");
  }
  spec.rel_tol = rel_tol;
  spec.abs_tol = abs_tol;
  spec.max_evaluations = max_evaluations;
  spec.mc_samples = mc_samples;
  spec.seed = seed;
  return spec;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "q-deformed growth-optimal portfolio toolkit";

  py::register_exception<DataError>(m, "DataError");
  py::register_exception<NumericalError>(m, "NumericalError");
  py::register_exception<UndefinedMetricError>(m, "UndefinedMetricError");

  // q-algebra ----------------------------------------------------------
  m.def("q_log", [](double x, double q) { return q_log(Deformation(q), x); }, py::arg("x"),
        py::arg("q"));
  m.def("q_exp", [](double x, double q) { return q_exp(Deformation(q), x); }, py::arg("x"),
        py::arg("q"));
  m.def(
      "q_product",
      [](const std::vector<double>& xs, double q) {
        return q_product_fold(Deformation(q), xs);
      },
      py::arg("factors"), py::arg("q"));
  m.def(
      "tsallis_entropy",
      [](const std::vector<double>& p, double q) {
        return tsallis_entropy(Deformation(q), DiscreteDistribution(p));
      },
      py::arg("probabilities"), py::arg("q"));

  // q-Gaussian ----------------------------------------------------------
  m.def("c_q", [](double q) { return c_q(Deformation::normalizable(q)); }, py::arg("q"));
  m.def(
      "c_dq",
      [](int dim, double q, const std::string& method) {
        if (method != "radial" && method != "recursion") {
          throw std::invalid_argument("method must be recursion or radial");
        }
        const CdqMethod route = method == "radial" ? CdqMethod::radial : CdqMethod::recursion;
        return c_dq(dim, Deformation::normalizable(q), route);
      },
      py::arg("dim"), py::arg("q"), py::arg("method") = "recursion");

  py::class_<MultivariateQGaussian>(m, "QGaussianModel")
      .def(py::init([](double q, std::vector<double> mu, std::vector<double> sigma) {
             return MultivariateQGaussian(Deformation(q), std::move(mu), std::move(sigma));
           }),
           py::arg("q"), py::arg("mu"), py::arg("sigma"))
      .def_property_readonly("q", [](const MultivariateQGaussian& g) { return g.q().q(); })
      .def_property_readonly("dim", &MultivariateQGaussian::dim)
      .def_property_readonly(
          "mu",
          [](const MultivariateQGaussian& g) {
            return std::vector<double>(g.mu().begin(), g.mu().end());
          })
      .def_property_readonly(
          "sigma",
          [](const MultivariateQGaussian& g) {
            return std::vector<double>(g.sigma().begin(), g.sigma().end());
          })
      .def("density",
           [](const MultivariateQGaussian& g, const std::vector<double>& x) {
             return density(g, x);
           },
           py::arg("x"))
      .def("log_density",
           [](const MultivariateQGaussian& g, const std::vector<double>& x) {
             return log_density(g, x);
           },
           py::arg("x"))
      .def(
          "sample",
          [](const MultivariateQGaussian& g, long long n, std::uint64_t seed) {
            RngStream rng(seed);
            Matrix out(static_cast<int>(n), g.dim());
            for (long long r = 0; r < n; ++r) sample(g, rng, out.row(static_cast<int>(r)));
            return from_matrix(out);
          },
          py::arg("n"), py::arg("seed") = 0)
      .def("log_likelihood",
           [](const MultivariateQGaussian& g,
              const py::array_t<double, py::array::c_style | py::array::forcecast>& data) {
             return log_likelihood(g, to_matrix(data));
           },
           py::arg("observations"));

  m.def(
      "density_1d",
      [](double x, double q, double mu, double sigma) {
        return density(UnivariateQGaussian(Deformation(q), mu, sigma), x);
      },
      py::arg("x"), py::arg("q"), py::arg("mu") = 0.0, py::arg("sigma") = 1.0);
  m.def(
      "sample_1d",
      [](long long n, double q, double mu, double sigma, std::uint64_t seed) {
        RngStream rng(seed);
        const UnivariateQGaussian g(Deformation(q), mu, sigma);
        std::vector<double> out(static_cast<std::size_t>(n));
        for (double& v : out) v = sample(g, rng);
        return out;
      },
      py::arg("n"), py::arg("q"), py::arg("mu") = 0.0, py::arg("sigma") = 1.0,
      py::arg("seed") = 0);

  // estimation ----------------------------------------------------------
  py::class_<FitResult>(m, "FitResult")
      .def_readonly("model", &FitResult::model)
      .def_readonly("log_likelihood", &FitResult::log_likelihood)
      .def_readonly("converged", &FitResult::converged)
      .def_readonly("trace", &FitResult::trace);

  m.def(
      "fit_mle",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>& data,
         std::pair<double, double> q_bounds, std::pair<double, double> mu_bounds,
         std::pair<double, double> sigma_bounds, int max_generations, std::uint64_t seed,
         int threads) {
        FitConfig config;
        config.q_bounds = q_bounds;
        config.mu_bounds = mu_bounds;
        config.sigma_bounds = sigma_bounds;
        config.de.max_generations = max_generations;
        config.de.seed = seed;
        config.de.threads = threads;
        return fit_mle(to_matrix(data), config);
      },
      py::arg("observations"), py::arg("q_bounds") = std::pair<double, double>{1.01, 2.2},
      py::arg("mu_bounds") = std::pair<double, double>{0.8, 1.2},
      py::arg("sigma_bounds") = std::pair<double, double>{1e-4, 0.5},
      py::arg("max_generations") = 300, py::arg("seed") = 0, py::arg("threads") = 1);

  m.def("fit_gaussian_baseline",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& data) {
          return fit_gaussian_baseline(to_matrix(data));
        },
        py::arg("observations"));
  m.def("gaussianize", &gaussianize, py::arg("model"));

  // portfolio -----------------------------------------------------------
  py::class_<Portfolio>(m, "Portfolio")
      .def(py::init<std::vector<double>>(), py::arg("weights"))
      .def_static("uniform", &Portfolio::uniform, py::arg("dim"))
      .def_property_readonly("weights",
                             [](const Portfolio& p) {
                               return std::vector<double>(p.weights().begin(),
                                                          p.weights().end());
                             })
      .def("factor",
           [](const Portfolio& p, const std::vector<double>& x) { return p.factor(x); },
           py::arg("x"));

  py::class_<GrowthRateEstimate>(m, "GrowthRateEstimate")
      .def_readonly("value", &GrowthRateEstimate::value)
      .def_readonly("std_error", &GrowthRateEstimate::std_error)
      .def_readonly("error_estimate", &GrowthRateEstimate::error_estimate)
      .def_readonly("converged", &GrowthRateEstimate::converged)
      .def_readonly("evaluations", &GrowthRateEstimate::evaluations)
      .def_readonly("rejection_fraction", &GrowthRateEstimate::rejection_fraction);

  m.def(
      "growth_q_rate",
      [](const Portfolio& b, const MultivariateQGaussian& model, const std::string& method,
         double rel_tol, double abs_tol, long long max_evaluations, long long mc_samples,
         std::uint64_t seed) {
        return growth_q_rate(b, model,
                             make_spec(method, rel_tol, abs_tol, max_evaluations, mc_samples,
                                       seed));
      },
      py::arg("portfolio"), py::arg("model"), py::arg("method") = "cubature_nd",
      py::arg("rel_tol") = 1e-8, py::arg("abs_tol") = 1e-12,
      py::arg("max_evaluations") = 10'000'000, py::arg("mc_samples") = 200'000,
      py::arg("seed") = 0);

  m.def(
      "optimal_portfolio",
      [](const MultivariateQGaussian& model, const std::string& method, double rel_tol,
         double abs_tol, long long max_evaluations, long long mc_samples, std::uint64_t seed,
         int max_generations, int threads) {
        DEConfig de;
        de.max_generations = max_generations;
        de.seed = seed;
        de.threads = threads;
        const OptimalPortfolioResult result = optimal_portfolio(
            model, make_spec(method, rel_tol, abs_tol, max_evaluations, mc_samples, seed), de);
        return py::make_tuple(result.portfolio, result.rate);
      },
      py::arg("model"), py::arg("method") = "cubature_nd", py::arg("rel_tol") = 1e-8,
      py::arg("abs_tol") = 1e-12, py::arg("max_evaluations") = 10'000'000,
      py::arg("mc_samples") = 200'000, py::arg("seed") = 0, py::arg("max_generations") = 300,
      py::arg("threads") = 1);

  // market data and wealth -----------------------------------------------
  py::class_<PriceRelativeSeries>(m, "PriceRelativeSeries")
      .def_readonly("tickers", &PriceRelativeSeries::tickers)
      .def_readonly("dates", &PriceRelativeSeries::dates)
      .def_property_readonly(
          "relatives",
          [](const PriceRelativeSeries& s) { return from_matrix(s.relatives); });

  m.def(
      "load_prices",
      [](const std::string& path, const std::vector<std::string>& tickers,
         const std::optional<std::string>& from, const std::optional<std::string>& to) {
        return load_prices(path, tickers, from, to);
      },
      py::arg("path"), py::arg("tickers"), py::arg("from_date") = std::nullopt,
      py::arg("to_date") = std::nullopt);

  py::class_<WealthTrajectory>(m, "WealthTrajectory")
      .def_readonly("days", &WealthTrajectory::days)
      .def_readonly("daily_factor", &WealthTrajectory::daily_factor)
      .def_readonly("wealth", &WealthTrajectory::wealth)
      .def_readonly("q_wealth", &WealthTrajectory::q_wealth);

  m.def(
      "wealth_relative",
      [](const Portfolio& b, const PriceRelativeSeries& data, double q) {
        return wealth_relative(b, data, Deformation(q));
      },
      py::arg("portfolio"), py::arg("data"), py::arg("q"));

  m.def(
      "sharpe_ratio",
      [](const std::vector<double>& returns, double risk_free) {
        return sharpe_ratio(returns, risk_free);
      },
      py::arg("returns"), py::arg("risk_free") = 0.0);
  m.def(
      "sortino_ratio",
      [](const std::vector<double>& returns, double target) {
        return sortino_ratio(returns, target);
      },
      py::arg("returns"), py::arg("target") = 0.0);
  m.def("simple_returns",
        [](const std::vector<double>& factors) { return simple_returns(factors); },
        py::arg("daily_factors"));
}
