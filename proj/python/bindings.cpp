// Python bindings: graphs and transition systems as opaque handles, results
// as plain Python values.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "sysgraph/cli.hpp"
#include "sysgraph/elaboration.hpp"
#include "sysgraph/equivalence.hpp"
#include "sysgraph/frontend.hpp"
#include "sysgraph/increment.hpp"
#include "sysgraph/runtime.hpp"
#include "sysgraph/skeleton.hpp"
#include "sysgraph/verification.hpp"
#include "sysgraph/version.hpp"

namespace py = pybind11;
using namespace sysgraph;

namespace {

std::string format_diagnostics(const std::vector<Diagnostic>& diags, const std::string& path) {
  std::string out;
  for (const auto& d : diags) out += (out.empty() ? "" : "\n") + d.format(path);
  return out;
}

template <typename T>
T unwrap(ParseResult<T> r) {
  if (!r.ok()) throw ModelError(r.diagnostics);
  return std::move(*r.value);
}

SystemGraph single(const Model& m) {
  if (m.components.size() != 1) throw ModelError("unsupported", "expected a single-system model");
  return m.components.front();
}

ExplorationConfig limit(std::size_t max_states) {
  ExplorationConfig cfg;
  cfg.max_states = max_states;
  return cfg;
}

RefinementMode mode_of(const std::string& mode) {
  if (mode == "bisim" || mode == "bisimulation") return RefinementMode::bisimulation;
  if (mode == "sim" || mode == "simulation") return RefinementMode::simulation;
  throw ModelError("usage", "mode must be 'bisim' or 'sim'");
}

py::dict trace_dict(const Trace& t) {
  py::list steps;
  for (const auto& s : t.steps) {
    py::dict d;
    d["key"] = s.key;
    d["labels"] = s.labels;
    d["action"] = s.action;
    d["components"] = s.components;
    d["timestamp"] = s.timestamp;
    steps.append(d);
  }
  py::dict out;
  out["model"] = t.model;
  out["steps"] = steps;
  out["stop"] = to_string(t.stop);
  out["terminal"] = t.terminal;
  out["text"] = write_trace(t);
  return out;
}

}  // namespace

PYBIND11_MODULE(_sysgraph, m) {
  m.doc() = "System graph modelling, elaboration, verification and code skeletons";
  m.attr("__version__") = kToolVersion;
  m.attr("SKELETON_SCHEMA_VERSION") = SkeletonBundle::kSchemaVersion;
  m.attr("RECORD_SCHEMA_VERSION") = kRecordSchemaVersion;

  // The type object lives as long as the interpreter; keep a bare handle.
  static py::handle model_error = py::exception<ModelError>(m, "ModelError", PyExc_ValueError).release();
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ModelError& e) {
      py::object err = model_error(e.what());
      err.attr("code") = e.code();
      PyErr_SetObject(model_error.ptr(), err.ptr());
    }
  });

  py::class_<SystemGraph>(m, "SystemGraph")
      .def_readonly("name", &SystemGraph::name)
      .def_readonly("initial", &SystemGraph::initial)
      .def_readonly("terminals", &SystemGraph::terminals)
      .def_readwrite("refinable", &SystemGraph::refinable)
      .def_property_readonly("declarators",
                             [](const SystemGraph& g) {
                               std::vector<std::string> out;
                               for (const auto& d : g.declarators) out.push_back(d.name);
                               return out;
                             })
      .def_property_readonly("transitions",
                             [](const SystemGraph& g) {
                               std::vector<std::tuple<std::string, std::string, std::string, std::string>> out;
                               for (const auto& t : g.transitions)
                                 out.emplace_back(t.source, t.guard.str(), t.action.str(), t.target);
                               return out;
                             })
      .def_property_readonly("variables", &SystemGraph::variable_names)
      .def("print", &print_graph)
      .def("canonical_text", &canonical_text)
      .def("digest", &graph_digest)
      .def("__eq__", [](const SystemGraph& a, const SystemGraph& b) { return a == b; })
      .def("__repr__", [](const SystemGraph& g) { return "<SystemGraph " + g.name + ">"; });

  py::class_<TransitionSystem>(m, "TransitionSystem")
      .def_property_readonly("states",
                             [](const TransitionSystem& ts) {
                               std::vector<std::string> out;
                               for (const auto& s : ts.states) out.push_back(s.key);
                               return out;
                             })
      .def_property_readonly("labels",
                             [](const TransitionSystem& ts) {
                               std::vector<std::set<std::string>> out;
                               for (const auto& s : ts.states) out.push_back(s.labels);
                               return out;
                             })
      .def_property_readonly("transitions",
                             [](const TransitionSystem& ts) {
                               std::vector<std::tuple<std::size_t, std::string, std::size_t>> out;
                               for (const auto& t : ts.transitions) out.emplace_back(t.source, t.action, t.target);
                               return out;
                             })
      .def_readonly("initials", &TransitionSystem::initials)
      .def("write", [](const TransitionSystem& ts) { return write_ts(ts); })
      .def("__repr__", [](const TransitionSystem& ts) {
        return "<TransitionSystem " + std::to_string(ts.states.size()) + " states>";
      });

  m.def(
      "parse",
      [](const std::string& text, const std::string& path) { return single(unwrap(parse_model({path, text}))); },
      py::arg("text"), py::arg("path") = "<string>", "Parse a single-system model from source text.");
  m.def(
      "load", [](const std::string& path) { return single(unwrap(load_model(path))); }, py::arg("path"),
      "Load a single-system model file.");
  m.def(
      "diagnostics",
      [](const std::string& text, const std::string& path) {
        auto r = parse_model({path, text});
        return format_diagnostics(r.diagnostics, path);
      },
      py::arg("text"), py::arg("path") = "<string>", "Formatted diagnostics for source text, empty when clean.");

  m.def(
      "elaborate",
      [](const SystemGraph& g, std::size_t max_states) { return elaborate(g, limit(max_states)); }, py::arg("graph"),
      py::arg("max_states") = ExplorationConfig{}.max_states);
  m.def(
      "check_property",
      [](const SystemGraph& g, const std::string& prop, bool stutter) {
        TransitionSystem ts = elaborate(g);
        CheckOptions opts;
        opts.stutter = stutter;
        Verdict v = check(ts, compile_property(prop, g), opts);
        py::dict out;
        out["holds"] = v.satisfied;
        out["logic"] = to_string(v.logic);
        if (v.counterexample) out["counterexample"] = format_lasso(ts, *v.counterexample);
        return out;
      },
      py::arg("graph"), py::arg("prop"), py::arg("stutter") = true);
  m.def(
      "refines",
      [](const SystemGraph& old_g, const SystemGraph& new_g, const std::string& mode, bool match_actions) {
        return refine_check(old_g, new_g, mode_of(mode), match_actions ? ActionMatching::by_name : ActionMatching::ignore)
            .holds;
      },
      py::arg("old"), py::arg("new"), py::arg("mode") = "bisim", py::arg("match_actions") = false);
  m.def("divergences", [](const SystemGraph& g) {
    std::vector<std::tuple<std::string, std::string, std::string>> out;
    for (const auto& d : detect_divergences(g))
      out.emplace_back(d.declarator, g.transitions[d.first].action.str(), g.transitions[d.second].action.str());
    return out;
  });

  m.def(
      "run",
      [](const SystemGraph& g, std::vector<std::string> resolve, std::map<std::string, std::vector<std::string>> feeds,
         std::size_t steps) {
        RunOptions opts;
        opts.step_limit = steps;
        for (const auto& [ch, values] : feeds) {
          const ChannelDecl* decl = g.find_channel(ch);
          if (!decl) throw ModelError("unresolved-name", "no channel '" + ch + "'");
          std::vector<TypedValue> vs;
          for (const auto& v : values) vs.push_back(parse_message(v, decl->domain));
          opts.endpoints.push_back(ChannelEndpoint::external(ch, std::move(vs)));
        }
        DivergenceResolver resolver = DivergenceResolver::scripted(std::move(resolve));
        opts.resolver = &resolver;
        return trace_dict(run(g, opts));
      },
      py::arg("graph"), py::arg("resolve") = std::vector<std::string>{},
      py::arg("feeds") = std::map<std::string, std::vector<std::string>>{}, py::arg("steps") = RunOptions{}.step_limit,
      "Run with scripted divergence choices and external channel feeds.");

  m.def(
      "skeleton",
      [](const SystemGraph& g, const std::vector<std::string>& props, bool force, const std::string& backend) {
        SkeletonOptions opts;
        opts.force = force;
        opts.evidence = verify_properties(g, props);
        SkeletonBundle b = generate_skeleton(g, opts);
        return backend == "text" ? render_reference_text(b) : render_bundle_json(b);
      },
      py::arg("graph"), py::arg("props") = std::vector<std::string>{}, py::arg("force") = false,
      py::arg("backend") = "json");
  m.def(
      "graph_from_skeleton", [](const std::string& json) { return bundle_to_graph(read_bundle_json(json)); },
      py::arg("json"));
  m.def(
      "promela",
      [](const SystemGraph& g, const std::vector<std::string>& props) {
        std::vector<Formula> fs;
        for (const auto& p : props) fs.push_back(compile_property(p, g));
        return emit_promela(g, fs);
      },
      py::arg("graph"), py::arg("props") = std::vector<std::string>{});

  m.def(
      "embed",
      [](const SystemGraph& inner, const SystemGraph& outer, const std::string& at) {
        EmbedResult r = embed(inner, outer, at);
        return py::make_tuple(r.graph, r.module, r.renames);
      },
      py::arg("inner"), py::arg("outer"), py::arg("at"));
  m.def("is_module", &is_module, py::arg("inner"), py::arg("outer"));
  m.def("classify_next_move", [](bool refinable, bool dependent) {
    return to_string(classify_next_move(refinable, dependent));
  });

  m.def(
      "cli",
      [](const std::vector<std::string>& args, const std::string& stdin_text) {
        std::istringstream in(stdin_text);
        std::ostringstream out, err;
        int code;
        {
          py::gil_scoped_release release;
          code = cli::dispatch(args, in, out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), py::arg("stdin") = "", "Run a command line; returns (exit code, stdout, stderr).");
}
