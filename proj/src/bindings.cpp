#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "ips/counterexample.hpp"
#include "ips/empirics.hpp"
#include "ips/experiment.hpp"
#include "ips/gen.hpp"
#include "ips/localize.hpp"
#include "ips/percolate.hpp"
#include "ips/sim.hpp"

namespace py = pybind11;
using namespace ips;

namespace {

Json to_json(const py::object& obj) {
  return Json::parse(py::module_::import("json").attr("dumps")(obj).cast<std::string>());
}

py::object from_json(const Json& doc) { return py::module_::import("json").attr("loads")(doc.dump()); }

ModelPtr as_model(const py::object& obj) {
  if (py::isinstance<py::dict>(obj)) return model_from_json(to_json(obj));
  return obj.cast<std::shared_ptr<RateModel>>();
}

}  // namespace

PYBIND11_MODULE(ips, m) {
  m.doc() = "Interacting particle systems on sparse marked graphs";

  static py::exception<Error> error(m, "Error");
  static py::exception<ConfigError> config_error(m, "ConfigError", PyExc_ValueError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ConfigError& e) {
      PyErr_SetString(config_error.ptr(), (e.pointer() + ": " + e.what()).c_str());
    } catch (const Error& e) {
      PyErr_SetString(error.ptr(), e.what());
    }
  });

  py::class_<MarkedGraph>(m, "Graph")
      .def(py::init<>())
      .def("add_vertex", py::overload_cast<State, Mark>(&MarkedGraph::add_vertex), py::arg("state") = 0,
           py::arg("mark") = Mark{})
      .def("add_edge", &MarkedGraph::add_edge, py::arg("u"), py::arg("v"), py::arg("mark") = Mark{})
      .def("__len__", &MarkedGraph::size)
      .def_property_readonly("edge_count", &MarkedGraph::edge_count)
      .def("neighbors", [](const MarkedGraph& g, VertexId v) {
        g.check_vertex(v);
        const auto s = g.neighbors(v);
        return std::vector<VertexId>(s.begin(), s.end());
      })
      .def("state", &MarkedGraph::state)
      .def("label", &MarkedGraph::label)
      .def("depth", &MarkedGraph::depth)
      .def_property("root", &MarkedGraph::root, &MarkedGraph::set_root)
      .def_property_readonly("is_lazy", &MarkedGraph::is_lazy)
      .def("expand", &MarkedGraph::expand)
      .def("truncate", [](MarkedGraph& g, std::uint32_t radius) { return truncate_ball(g, radius); })
      .def("to_dict", [](const MarkedGraph& g) { return from_json(graph_to_json(g)); })
      .def_static("from_dict", [](const py::object& d) { return graph_from_json(to_json(d)); });

  m.def("load_graph", [](const std::string& path) { return load_graph(path); });
  m.def("generate", [](const py::object& spec, std::uint64_t seed, std::size_t budget) {
    return graph_from_spec(to_json(spec), seed, budget);
  }, py::arg("spec"), py::arg("seed"), py::arg("budget") = 100000,
        "Graph from a generator spec such as {'generator': 'erdos_renyi', 'n': 100, 'c': 2}.");

  py::class_<RateModel, std::shared_ptr<RateModel>>(m, "Model")
      .def_property_readonly("name", &RateModel::name)
      .def("bound", &RateModel::bound);
  py::class_<ContactModel, RateModel, std::shared_ptr<ContactModel>>(m, "ContactModel")
      .def(py::init<double>(), py::arg("lam"));
  py::class_<OneWayInfectionModel, RateModel, std::shared_ptr<OneWayInfectionModel>>(m, "OneWayInfectionModel")
      .def(py::init<>());
  m.def("model", [](const py::object& spec) { return std::const_pointer_cast<RateModel>(model_from_json(to_json(spec))); },
        "Model from a spec such as {'name': 'contact', 'lambda': 1}.");

  py::class_<Trajectory>(m, "Trajectory")
      .def_readonly("x0", &Trajectory::x0)
      .def_property_readonly("jumps", [](const Trajectory& t) {
        std::vector<std::pair<Time, State>> out;
        for (const auto& j : t.jumps) out.emplace_back(j.t, j.j);
        return out;
      })
      .def("value_at", &Trajectory::value_at)
      .def("__eq__", [](const Trajectory& a, const Trajectory& b) { return a == b; });

  py::class_<DrivingNoise>(m, "Noise")
      .def(py::init([](std::uint64_t seed, const py::object& model, Time horizon, double band_width) {
             return DrivingNoise(seed, as_model(model)->jump_spec(), horizon, band_width);
           }),
           py::arg("seed"), py::arg("model"), py::arg("horizon"), py::arg("band_width") = 1.0)
      .def("events", [](const DrivingNoise& n, VertexKey key, double cap) {
        std::vector<std::tuple<Time, double, State>> out;
        for (const auto& e : n.events(key, cap, 0.0, n.horizon())) out.emplace_back(e.t, e.r, e.j);
        return out;
      });

  m.def("simulate", [](const MarkedGraph& g, const py::object& model, const DrivingNoise& noise, Time horizon) {
    return simulate_finite(g, *as_model(model), noise, horizon).trajectories;
  }, py::arg("graph"), py::arg("model"), py::arg("noise"), py::arg("horizon"));

  m.def("verify", [](const MarkedGraph& g, const py::object& model, const DrivingNoise& noise,
                     const std::vector<Trajectory>& trajectories, Time horizon) {
    return verify_sde(g, *as_model(model), noise, trajectories, horizon).ok();
  }, py::arg("graph"), py::arg("model"), py::arg("noise"), py::arg("trajectories"), py::arg("horizon"));

  m.def("influence_set", [](MarkedGraph& g, const py::object& model, const DrivingNoise& noise,
                            const std::vector<VertexId>& targets, Time horizon, std::size_t budget) {
    for (VertexId v : targets) g.check_vertex(v);
    const auto u = influence_set(g, noise, *as_model(model), targets, horizon, budget);
    py::dict out;
    out["vertices"] = u.vertices;
    std::vector<std::tuple<Time, VertexId, std::size_t>> trace;
    for (const auto& s : u.trace) trace.emplace_back(s.tau, s.vertex, s.set_size);
    out["trace"] = trace;
    out["exhausted"] = u.exhausted;
    return out;
  }, py::arg("graph"), py::arg("model"), py::arg("noise"), py::arg("targets"), py::arg("horizon"),
        py::arg("budget") = 100000);

  m.def("localized_marginal", [](MarkedGraph& g, const py::object& model, const DrivingNoise& noise,
                                 const std::vector<VertexId>& targets, Time horizon, std::size_t budget) {
    for (VertexId v : targets) g.check_vertex(v);
    return localized_marginal(g, *as_model(model), noise, targets, horizon, budget).trajectories;
  }, py::arg("graph"), py::arg("model"), py::arg("noise"), py::arg("targets"), py::arg("horizon"),
        py::arg("budget") = 100000, "Exact trajectories of the target vertex ids; raises ips.Error on exhaustion.");

  m.def("percolate", [](MarkedGraph& g, const py::object& model, const DrivingNoise& noise, double delta,
                        Time horizon) {
    const auto r = percolate(g, *as_model(model), noise, delta, horizon);
    py::dict out;
    out["active"] = r.active;
    out["components"] = r.components;
    out["root_component_size"] = r.root_component_size;
    out["exhausted"] = r.exhausted;
    return out;
  });

  m.def("ctmc_oracle", [](const MarkedGraph& g, const py::object& model, const std::vector<Time>& times) {
    const auto res = ctmc_oracle(g, *as_model(model), times);
    std::vector<std::vector<std::vector<double>>> marginals;  // [time][vertex][state]
    for (std::size_t i = 0; i < times.size(); ++i) {
      auto& per_vertex = marginals.emplace_back();
      for (VertexId v = 0; v < g.size(); ++v) {
        auto& row = per_vertex.emplace_back();
        for (State s : res.state_space()) row.push_back(res.marginal(i, v, s));
      }
    }
    return marginals;
  }, "Exact marginals indexed [time][vertex][state].");

  m.def("counterexample", [](std::uint32_t depth, std::uint64_t seed, Time horizon, std::size_t budget) {
    MarkedGraph tree = counterexample_tree(depth, seed, budget);
    const DrivingNoise noise(seed, OneWayInfectionModel().jump_spec(), horizon);
    const auto cert = detect_chain(tree, noise, depth, horizon, ChainStrategy::Exhaustive);
    const auto sols = two_solutions(tree, noise, depth, horizon);
    py::dict out;
    out["found"] = cert.found;
    out["times"] = cert.times;
    out["root_time"] = sols.root_time;
    out["zero_ok"] = sols.zero_verdict.ok();
    out["tilde_ok"] = sols.tilde_verdict.ok();
    return out;
  }, py::arg("depth"), py::arg("seed"), py::arg("horizon") = 1.0, py::arg("budget") = 50000000);

  m.def("run", [](const py::object& config) {
    const auto c = parse_config(to_json(config));
    RunOutcome res;
    {
      py::gil_scoped_release release;
      res = run_experiment(c);
    }
    py::dict out;
    out["exit_code"] = res.exit_code;
    out["summary"] = res.summary;
    py::dict artifacts;
    for (const auto& [suffix, content] : res.artifacts) artifacts[py::str(suffix)] = content;
    out["artifacts"] = artifacts;
    return out;
  }, "Runs an experiment config (a dict) and returns its outputs as strings keyed by file suffix.");
}
