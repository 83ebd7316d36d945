#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "voxscore/cli.hpp"
#include "voxscore/evalkit.hpp"
#include "voxscore/gridgen.hpp"
#include "voxscore/moldata.hpp"
#include "voxscore/tensornet.hpp"
#include "voxscore/training.hpp"

namespace py = pybind11;
using namespace voxscore;

namespace {

GridConfig grid_config(double dimension, double resolution, const std::string& scheme,
                       const std::string& occupancy) {
  GridConfig g;
  g.dimension = dimension;
  g.resolution = resolution;
  g.scheme = AtomTypeScheme(scheme_from_name(scheme));
  if (occupancy == "boolean") {
    g.occupancy = Occupancy::Boolean;
  } else if (occupancy != "gaussian") {
    throw InvalidArgument("occupancy must be 'gaussian' or 'boolean'");
  }
  g.validate();
  return g;
}

py::array_t<float> grid_array(const DensityGrid& g) {
  py::array_t<float> out({g.channels, g.side, g.side, g.side});
  std::copy(g.values.begin(), g.values.end(), out.mutable_data());
  return out;
}

class Model {
 public:
  Model(int channels, int side, std::uint64_t seed)
      : spec_(build_final_model(channels, side)) {
    Rng rng(seed);
    weights_ = init_weights(spec_, rng);
  }

  double score(py::array_t<double, py::array::c_style | py::array::forcecast> grid) const {
    const Shape shape = spec_.input_shape();
    if (static_cast<std::size_t>(grid.ndim()) != shape.size()) {
      throw InvalidArgument("grid must have shape " + shape_string(shape));
    }
    for (std::size_t i = 0; i < shape.size(); ++i) {
      if (static_cast<std::size_t>(grid.shape(i)) != shape[i]) {
        throw InvalidArgument("grid must have shape " + shape_string(shape));
      }
    }
    Tensor t(shape);
    std::copy(grid.data(), grid.data() + t.size(), t.values.begin());
    return forward(spec_, weights_, t, Mode::Test)[1];
  }

  py::bytes checkpoint() const {
    const auto bytes = save_checkpoint(spec_, weights_);
    return py::bytes(reinterpret_cast<const char*>(bytes.data()), bytes.size());
  }

  void load(const py::bytes& data) {
    const std::string s = data;
    weights_ = load_checkpoint(
        spec_, std::span(reinterpret_cast<const std::byte*>(s.data()), s.size()));
  }

  std::string describe() const { return spec_.describe(); }
  std::size_t parameter_count() const { return weights_.parameter_count(); }

 private:
  NetworkSpec spec_;
  WeightSet weights_;
};

}  // namespace

PYBIND11_MODULE(_voxscore, m) {
  m.doc() = "voxscore core bindings";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<DataError>(m, "DataError", base.ptr());
  py::register_exception<InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);

  m.def("atom_density", &atom_density, py::arg("d"), py::arg("r"),
        py::arg("multiplier") = 1.5);

  m.def(
      "parse_structure",
      [](const std::string& text, const std::string& scheme) {
        const Molecule mol = assign_types(parse_structure_text(text),
                                          AtomTypeScheme(scheme_from_name(scheme)));
        py::list atoms;
        for (const auto& a : mol.atoms) {
          atoms.append(py::make_tuple(a.element, a.position.x, a.position.y, a.position.z,
                                      a.channel));
        }
        return atoms;
      },
      py::arg("text"), py::arg("scheme") = "smina34",
      "Parse the text structure format; returns (element, x, y, z, channel) tuples.");

  m.def(
      "voxelize",
      [](const std::string& receptor, const std::string& ligand, double dimension,
         double resolution, const std::string& scheme, const std::string& occupancy) {
        const GridConfig g = grid_config(dimension, resolution, scheme, occupancy);
        const Molecule rec = assign_types(parse_structure_text(receptor), g.scheme);
        const Molecule lig = assign_types(parse_structure_text(ligand), g.scheme);
        return grid_array(voxelize(rec, lig, molecule_center(lig), g));
      },
      py::arg("receptor"), py::arg("ligand"), py::arg("dimension") = 24.0,
      py::arg("resolution") = 0.5, py::arg("scheme") = "smina34",
      py::arg("occupancy") = "gaussian",
      "Grid of shape (channels, n, n, n) centered on the ligand.");

  py::class_<Model>(m, "Model")
      .def(py::init<int, int, std::uint64_t>(), py::arg("channels"), py::arg("side"),
           py::arg("seed") = 0)
      .def("score", &Model::score, py::arg("grid"))
      .def("checkpoint", &Model::checkpoint)
      .def("load", &Model::load, py::arg("data"))
      .def("describe", &Model::describe)
      .def_property_readonly("parameter_count", &Model::parameter_count);

  m.def(
      "build_final_model",
      [](int channels, int side) { return build_final_model(channels, side).describe(); },
      py::arg("channels"), py::arg("side"));

  m.def(
      "roc_auc",
      [](const std::vector<double>& scores, const std::vector<int>& labels) {
        return roc_auc(scores, labels).auc;
      },
      py::arg("scores"), py::arg("labels"));

  m.def(
      "label_pose",
      [](double rmsd) -> py::object {
        switch (label_pose(rmsd)) {
          case PoseLabel::Positive: return py::int_(1);
          case PoseLabel::Negative: return py::int_(0);
          default: return py::none();
        }
      },
      py::arg("rmsd"), "1 for < 2 Å, 0 for > 4 Å, None in between.");

  m.def(
      "lr_at",
      [](long iter, double base_lr, double gamma, double power) {
        SolverConfig c;
        c.base_lr = base_lr;
        c.gamma = gamma;
        c.power = power;
        return lr_at(iter, c);
      },
      py::arg("iteration"), py::arg("base_lr") = 0.01, py::arg("gamma") = 0.001,
      py::arg("power") = 1.0);

  m.def(
      "make_folds",
      [](const std::vector<std::string>& clusters, int k) {
        std::vector<PoseRecord> records;
        for (const auto& c : clusters) {
          PoseRecord r;
          r.label = 1;
          r.target_id = c;
          r.cluster_id = c;
          records.push_back(r);
        }
        return make_folds(DatasetIndex(std::move(records)), k).folds;
      },
      py::arg("clusters"), py::arg("k"), "Record indices per fold, one cluster id per record.");

  m.def(
      "topn",
      [](const std::vector<std::vector<std::pair<double, double>>>& targets, int n) {
        TargetGroups groups;
        for (std::size_t t = 0; t < targets.size(); ++t) {
          auto& g = groups.emplace_back();
          for (const auto& [score, rmsd] : targets[t]) {
            ScoredExample e;
            e.score = score;
            e.rmsd = rmsd;
            e.label = rmsd < kGoodPoseRmsd ? 1 : 0;
            e.target_id = std::to_string(t);
            g.push_back(e);
          }
        }
        return intra_target_topn(groups, n);
      },
      py::arg("targets"), py::arg("n"),
      "Fraction of targets with a good pose among the n best; targets are lists of "
      "(score, rmsd).");

  m.def(
      "pearson",
      [](const std::vector<double>& x, const std::vector<double>& y) { return pearson(x, y); },
      py::arg("x"), py::arg("y"));
  m.def("logit", [](double p) { return logit(p).value; }, py::arg("p"));

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        int code = 0;
        {
          py::gil_scoped_release release;
          code = cli::run(args, out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Run a CLI subcommand; returns (exit_code, stdout, stderr).");
}
