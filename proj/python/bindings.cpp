#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "json.hpp"
#include "ranklaw/cli.hpp"
#include "ranklaw/corr.hpp"
#include "ranklaw/error.hpp"
#include "ranklaw/fit.hpp"
#include "ranklaw/regime.hpp"
#include "ranklaw/stats.hpp"
#include "ranklaw/urnsim.hpp"

namespace py = pybind11;
using namespace ranklaw;

namespace {

py::object to_python(const nlohmann::json& j) {
  switch (j.type()) {
    case nlohmann::json::value_t::null: return py::none();
    case nlohmann::json::value_t::boolean: return py::bool_(j.get<bool>());
    case nlohmann::json::value_t::number_integer: return py::int_(j.get<std::int64_t>());
    case nlohmann::json::value_t::number_unsigned: return py::int_(j.get<std::uint64_t>());
    case nlohmann::json::value_t::number_float: return py::float_(j.get<double>());
    case nlohmann::json::value_t::string: return py::str(j.get<std::string>());
    case nlohmann::json::value_t::array: {
      py::list out;
      for (const auto& v : j) out.append(to_python(v));
      return out;
    }
    case nlohmann::json::value_t::object: {
      py::dict out;
      for (const auto& [k, v] : j.items()) out[py::str(k)] = to_python(v);
      return out;
    }
    default: return py::none();
  }
}

rank::RankedSeries series_from(const std::vector<double>& values, const std::vector<std::string>& ids) {
  if (!ids.empty() && ids.size() != values.size()) throw InvalidArgument("python", "ids and values differ in length");
  std::vector<rank::Item> items;
  items.reserve(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const std::string id = ids.empty() ? std::to_string(i) : ids[i];
    items.push_back({id, id, values[i]});
  }
  return rank::rank_desc(items, rank::TieBreak::entity_id);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Rank-size analysis core";

  static py::exception<Error> base(m, "RanklawError");
  py::register_exception<InvalidArgument>(m, "InvalidArgument", base.ptr());
  py::register_exception<DataError>(m, "DataError", base.ptr());
  py::register_exception<NumericError>(m, "NumericError", base.ptr());

  m.def("describe", [](const std::vector<double>& v) { return to_python(stats::to_json(stats::describe(v))); },
        py::arg("values"));

  m.def(
      "kendall_counts",
      [](const std::vector<double>& x, const std::vector<double>& y) {
        return to_python(corr::to_json(corr::kendall_counts(x, y)));
      },
      py::arg("x"), py::arg("y"));
  m.def("kendall_tau", py::overload_cast<std::int64_t, std::int64_t>(&corr::kendall_tau), py::arg("p"), py::arg("q"));
  m.def(
      "z_score",
      [](double tau, std::int64_t n) {
        const auto z = corr::z_score(tau, n);
        return py::make_tuple(z.sigma_tau, z.z);
      },
      py::arg("tau"), py::arg("n"));
  m.def(
      "correlate",
      [](const std::vector<double>& x, const std::vector<double>& y, const std::vector<std::string>& ids) {
        return to_python(corr::to_json(corr::correlate(series_from(x, ids), series_from(y, ids))));
      },
      py::arg("x"), py::arg("y"), py::arg("ids") = std::vector<std::string>{});

  m.def(
      "fit",
      [](const std::vector<double>& values, const std::string& model, std::optional<double> A, const std::string& scale,
         std::optional<double> N) {
        const auto s = series_from(values, {});
        fit::FitOptions opt;
        opt.scale = fit::parse_scale(scale);
        opt.N = N;
        return to_python(fit::to_json(
            fit::fit_model(s, fit::parse_model_kind(model), A.value_or(fit::default_amplitude(s)), opt)));
      },
      py::arg("values"), py::arg("model") = "lavalette3", py::arg("A") = py::none(), py::arg("scale") = "log",
      py::arg("N") = py::none());
  m.def(
      "model_eval",
      [](const std::string& model, double A, double N, const std::vector<double>& params, double r) {
        fit::RankSizeModel mdl{fit::parse_model_kind(model), A, N, {}};
        if (params.size() != fit::param_count(mdl.kind)) throw InvalidArgument("python", "wrong number of parameters");
        std::copy(params.begin(), params.end(), mdl.params.begin());
        return fit::model_eval(mdl, r);
      },
      py::arg("model"), py::arg("A"), py::arg("N"), py::arg("params"), py::arg("r"));

  m.def(
      "two_line_split",
      [](const std::vector<double>& x, const std::vector<double>& y, const std::vector<std::string>& ids, int k) {
        if (x.size() != y.size()) throw InvalidArgument("python", "x and y differ in length");
        regime::ScatterSet s;
        for (std::size_t i = 0; i < x.size(); ++i) s.points.push_back({ids.empty() ? std::to_string(i) : ids.at(i), x[i], y[i]});
        regime::SplitOptions opt;
        opt.k = k;
        return to_python(regime::to_json(regime::two_line_split(s, opt)));
      },
      py::arg("x"), py::arg("y"), py::arg("ids") = std::vector<std::string>{}, py::arg("k") = 2);

  m.def("incomplete_beta", &urnsim::incomplete_beta, py::arg("a"), py::arg("b"), py::arg("eps"));
  m.def("beta", &urnsim::beta_fn, py::arg("x"), py::arg("y"));
  m.def("yule_simon_pmf", &urnsim::yule_simon_pmf, py::arg("k"), py::arg("a"), py::arg("b"), py::arg("k0") = 1);
  m.def(
      "simulate_urns",
      [](std::int64_t n_urns, std::int64_t total_balls, double a, std::int64_t k0, std::optional<std::int64_t> capacity,
         std::uint64_t seed, std::uint64_t substream) {
        urnsim::UrnConfig c;
        c.n_urns = n_urns;
        c.total_balls = total_balls;
        c.a = a;
        c.k0 = k0;
        c.capacity = capacity;
        c.seed = seed;
        return urnsim::simulate_urns(c, substream).occupancy;
      },
      py::arg("n_urns"), py::arg("total_balls"), py::arg("a") = 1.0, py::arg("k0") = 1, py::arg("capacity") = py::none(),
      py::arg("seed") = 0, py::arg("substream") = 0);

  m.def(
      "main",
      [](std::vector<std::string> args) {
        args.insert(args.begin(), "ranklaw");
        std::vector<char*> argv;
        for (auto& a : args) argv.push_back(a.data());
        return cli::main_entry(static_cast<int>(argv.size()), argv.data());
      },
      py::arg("args"));
}
