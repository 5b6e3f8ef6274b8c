#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "steersman/baselines.hpp"
#include "steersman/error.hpp"
#include "steersman/harness.hpp"

namespace py = pybind11;
using namespace steersman;

namespace {

struct Library {
    std::shared_ptr<const env::ModelLibrary> ptr;

    int index(const std::string& label) const { return ptr->index_of(label); }
    const info::ConditionScorer& scorer(const std::string& label) const { return ptr->scorer(index(label)); }
};

py::dict metrics_dict(const agent::EpochMetrics& m) {
    py::dict d;
    d["epoch"] = m.epoch;
    d["mean_episode_reward"] = m.mean_episode_reward;
    d["reward_std"] = m.reward_std;
    d["final_score"] = m.final_score;
    d["episode_score_sum"] = m.episode_score_sum;
    d["epsilon"] = m.epsilon;
    d["wall_time"] = m.wall_time;
    return d;
}

py::dict placement_dict(const baselines::PlacementResult& r) {
    py::dict d;
    d["method"] = r.method;
    d["selected"] = r.selected;
    d["det"] = r.det;
    d["score"] = r.score;
    return d;
}

py::dict state_dict(const env::EnvState& s) {
    py::dict d;
    d["positions"] = s.positions;
    d["condition"] = s.condition_label;
    d["step"] = s.step_count;
    d["score"] = s.last_score;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Adaptive sensor steering on a cantilever plate";

    static py::exception<Error> base(m, "SteersmanError");
    static py::exception<ConfigError> config_error(m, "ConfigError", base.ptr());
    static py::exception<InvalidArgument> invalid(m, "InvalidArgument", base.ptr());
    static py::exception<FormatError> format_error(m, "FormatError", base.ptr());
    static py::exception<SingularityError> singular(m, "SingularityError", base.ptr());
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const ConfigError& e) {
            py::set_error(config_error, e.what());
        } catch (const InvalidArgument& e) {
            py::set_error(invalid, e.what());
        } catch (const FormatError& e) {
            py::set_error(format_error, e.what());
        } catch (const SingularityError& e) {
            py::set_error(singular, e.what());
        } catch (const Error& e) {
            py::set_error(base, (e.kind() + ": " + e.what()).c_str());
        }
    });

    py::class_<harness::ExperimentConfig>(m, "Config")
        .def_readwrite("name", &harness::ExperimentConfig::name)
        .def_readwrite("seed", &harness::ExperimentConfig::seed)
        .def_readwrite("sensors", &harness::ExperimentConfig::sensors)
        .def_readwrite("modes", &harness::ExperimentConfig::modes)
        .def_readwrite("episode_length", &harness::ExperimentConfig::episode_length)
        .def_readwrite("correlation_length", &harness::ExperimentConfig::correlation_length)
        .def_property_readonly("grid", [](const harness::ExperimentConfig& c) {
            return std::pair{c.plate.grid_cols, c.plate.grid_rows};
        })
        .def_property_readonly("labels", &harness::ExperimentConfig::labels)
        .def_property(
            "epochs", [](const harness::ExperimentConfig& c) { return c.agent.epochs; },
            [](harness::ExperimentConfig& c, int v) { c.agent.epochs = v; })
        .def_property(
            "epoch_steps", [](const harness::ExperimentConfig& c) { return c.agent.epoch_steps; },
            [](harness::ExperimentConfig& c, int v) { c.agent.epoch_steps = v; })
        .def_property_readonly("digest", &harness::config_digest)
        .def("to_yaml", &harness::canonical_text);

    m.def("load_config", [](const std::filesystem::path& p) { return harness::load_config(p); }, py::arg("path"));
    m.def("parse_config", &harness::parse_config, py::arg("text"), py::arg("origin") = "<string>");

    py::class_<Library>(m, "Library")
        .def_property_readonly("labels", [](const Library& l) {
            std::vector<std::string> out;
            for (int i = 0; i < l.ptr->size(); ++i) out.push_back(l.ptr->label(i));
            return out;
        })
        .def_property_readonly("grid", [](const Library& l) { return std::pair{l.ptr->grid().cols, l.ptr->grid().rows}; })
        .def_property_readonly("sensors", [](const Library& l) { return l.ptr->sensors(); })
        .def("frequencies", [](const Library& l, const std::string& c) { return l.scorer(c).basis().frequencies; })
        .def("mode_shapes", [](const Library& l, const std::string& c) { return l.scorer(c).basis().phi; })
        .def("covariance", [](const Library& l, const std::string& c) { return l.scorer(c).covariance().sigma; })
        .def("normalizer", [](const Library& l, const std::string& c) { return l.scorer(c).normalizer(); })
        .def("score", [](const Library& l, const std::string& c, const std::vector<int>& sel) {
            return l.scorer(c).score(sel);
        })
        .def("fim", [](const Library& l, const std::string& c, const std::vector<int>& sel) {
            const auto& s = l.scorer(c);
            const auto r = info::fim(sel, s.basis().phi, s.covariance(), s.normalizer());
            return py::make_tuple(r.q, r.det);
        })
        .def("efi", [](const Library& l, const std::string& c, int p) {
            return placement_dict(baselines::efi_select(l.scorer(c), p));
        })
        .def("fssp", [](const Library& l, const std::string& c, int p) {
            return placement_dict(baselines::fssp_select(l.scorer(c), p));
        })
        .def("brute_force", [](const Library& l, const std::string& c, int p) {
            return placement_dict(baselines::brute_force_optimum(l.scorer(c), p));
        });

    m.def("build_library", [](const harness::ExperimentConfig& c) {
        py::gil_scoped_release release;
        return Library{harness::build_library(c)};
    });

    py::class_<env::SteerEnv>(m, "Env")
        .def(py::init([](const Library& l, const harness::ExperimentConfig& c) {
            return env::SteerEnv(l.ptr, c.env_config());
        }))
        .def("reset", [](env::SteerEnv& e, std::optional<std::uint64_t> seed, std::optional<std::string> condition) {
            return state_dict(e.reset(seed, condition));
        }, py::arg("seed") = py::none(), py::arg("condition") = py::none())
        .def("step", [](env::SteerEnv& e, int code) {
            const auto r = e.step({code});
            py::dict d = state_dict(r.state);
            d["reward"] = r.reward;
            d["truncated"] = r.truncated;
            d["null_action"] = r.info.null_action;
            return d;
        })
        .def_property_readonly("state", [](const env::SteerEnv& e) { return state_dict(e.state()); })
        .def_property_readonly("action_count", &env::SteerEnv::action_count)
        .def("observation", [](const env::SteerEnv& e) {
            const auto obs = e.observation();
            return Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(obs.data(), static_cast<Eigen::Index>(obs.size())));
        });

    m.def("train", [](const harness::ExperimentConfig& c, const std::filesystem::path& out, bool resume, int stop_after) {
        harness::TrainOptions o;
        o.resume = resume;
        o.stop_after = stop_after;
        harness::TrainArtifacts a;
        {
            py::gil_scoped_release release;
            a = harness::run_train(c, out, o);
        }
        py::list rows;
        for (const auto& r : a.metrics) rows.append(metrics_dict(r));
        return rows;
    }, py::arg("config"), py::arg("out"), py::arg("resume") = false, py::arg("stop_after") = 0);

    m.def("evaluate", [](const harness::ExperimentConfig& c, const std::filesystem::path& checkpoint,
                         const std::filesystem::path& out) {
        std::vector<harness::ConditionSummary> rows;
        {
            py::gil_scoped_release release;
            rows = harness::run_eval(c, checkpoint, out);
        }
        py::list result;
        for (const auto& s : rows) {
            py::dict d;
            d["condition"] = s.condition;
            d["agent_final"] = s.agent_final;
            d["agent_score_sum"] = s.agent_score_sum;
            d["random_mean_final"] = s.random_mean_final;
            d["efi_score"] = s.efi_score;
            d["oracle_score"] = s.oracle_score;
            d["agent_positions"] = s.agent_final_positions;
            result.append(d);
        }
        return result;
    });

    m.def("read_metrics", [](const std::filesystem::path& p) {
        py::list rows;
        for (const auto& r : harness::read_metrics_csv(p)) rows.append(metrics_dict(r));
        return rows;
    });
}
