#include <sstream>
#include <string>
#include <vector>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "pacs/checkpoint.hpp"
#include "pacs/cli.hpp"
#include "pacs/container.hpp"
#include "pacs/embedding.hpp"
#include "pacs/error.hpp"
#include "pacs/evalstats.hpp"
#include "pacs/loss.hpp"
#include "pacs/scoring.hpp"

namespace py = pybind11;
using namespace pacs;

namespace {

EmbeddingVector unit(const Eigen::VectorXd& v) { return l2_normalize(FeatureVector(v)); }

std::vector<EmbeddingVector> unit_rows(const Eigen::MatrixXd& m) {
  std::vector<EmbeddingVector> out;
  out.reserve(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) out.push_back(unit(m.row(i).transpose()));
  return out;
}

Heads make_heads(const Eigen::MatrixXd& visual, const Eigen::MatrixXd& textual) {
  return Heads{ProjectionHead(visual), ProjectionHead(textual)};
}

PacBatch make_batch(Eigen::MatrixXd v, Eigen::MatrixXd t, Eigen::MatrixXd vg, Eigen::MatrixXd tg) {
  return PacBatch{std::move(v), std::move(t), std::move(vg), std::move(tg)};
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Positive-augmented contrastive caption scoring: core bindings.";

  static py::exception<Error> pacs_error(m, "PacsError", PyExc_ValueError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::set_error(pacs_error, ("[" + std::string(to_string(e.code())) + "] " + e.what()).c_str());
    }
  });

  // Embeddings and scores. Vectors are L2-normalized on the way in, so raw
  // projected features can be passed directly.
  m.def("l2_normalize", [](const Eigen::VectorXd& v) { return unit(v).values(); }, py::arg("v"));
  m.def("cosine", [](const Eigen::VectorXd& a, const Eigen::VectorXd& b) { return cosine(unit(a), unit(b)); },
        py::arg("a"), py::arg("b"));
  m.def(
      "pac_score",
      [](const Eigen::VectorXd& caption, const Eigen::VectorXd& image, double w) {
        return pac_score(unit(caption), unit(image), ScoreConfig{w, 1.0});
      },
      py::arg("caption"), py::arg("image"), py::arg("w") = 2.0);
  m.def(
      "ref_pac_score",
      [](const Eigen::VectorXd& caption, const Eigen::VectorXd& image, const Eigen::MatrixXd& refs, double w) {
        return ref_pac_score(unit(caption), unit(image), unit_rows(refs), ScoreConfig{w, 1.0});
      },
      py::arg("caption"), py::arg("image"), py::arg("refs"), py::arg("w") = 2.0,
      "refs holds one reference embedding per row.");

  py::class_<IdfTable>(m, "IdfTable")
      .def(py::init<std::unordered_map<std::string, double>, std::size_t>(), py::arg("weights"),
           py::arg("corpus_size"))
      .def("lookup", &IdfTable::lookup)
      .def_property_readonly("corpus_size", &IdfTable::corpus_size)
      .def_property_readonly("weights", &IdfTable::weights);
  m.def(
      "compute_idf",
      [](const std::vector<std::vector<std::string>>& corpus) { return compute_idf(corpus); },
      py::arg("corpus"));
  m.def("tokenize", &tokenize, py::arg("text"));

  m.def(
      "video_score",
      [](const Eigen::MatrixXd& tokens, const Eigen::VectorXd& global, const Eigen::MatrixXd& frames,
         std::vector<std::string> surface, const IdfTable* idf, double video_w) {
        const TokenSequence seq{std::move(surface), unit_rows(tokens), unit(global)};
        const IdfTable fallback({}, 0);
        return video_score(seq, unit_rows(frames), idf ? *idf : fallback, ScoreConfig{2.0, video_w});
      },
      py::arg("tokens"), py::arg("global_embedding"), py::arg("frames"),
      py::arg("surface") = std::vector<std::string>{}, py::arg("idf") = nullptr, py::arg("video_w") = 1.0);

  // Contrastive loss.
  m.def(
      "info_nce",
      [](Eigen::MatrixXd images, Eigen::MatrixXd texts, double tau) {
        normalize_rows(images);
        normalize_rows(texts);
        return info_nce(images, texts, tau);
      },
      py::arg("images"), py::arg("texts"), py::arg("tau") = 0.01);
  m.def(
      "pac_loss",
      [](Eigen::MatrixXd v, Eigen::MatrixXd t, Eigen::MatrixXd vg, Eigen::MatrixXd tg,
         const Eigen::MatrixXd& w_visual, const Eigen::MatrixXd& w_textual, double tau, double lambda_v,
         double lambda_t) {
        return pac_loss(make_batch(std::move(v), std::move(t), std::move(vg), std::move(tg)),
                        make_heads(w_visual, w_textual), LossConfig{tau, lambda_v, lambda_t});
      },
      py::arg("visual"), py::arg("text"), py::arg("visual_gen"), py::arg("text_gen"), py::arg("w_visual"),
      py::arg("w_textual"), py::arg("tau") = 0.01, py::arg("lambda_v") = 0.05, py::arg("lambda_t") = 0.1);
  m.def(
      "pac_loss_grad",
      [](Eigen::MatrixXd v, Eigen::MatrixXd t, Eigen::MatrixXd vg, Eigen::MatrixXd tg,
         const Eigen::MatrixXd& w_visual, const Eigen::MatrixXd& w_textual, double tau, double lambda_v,
         double lambda_t) {
        const PacLossGrad g =
            pac_loss_grad(make_batch(std::move(v), std::move(t), std::move(vg), std::move(tg)),
                          make_heads(w_visual, w_textual), LossConfig{tau, lambda_v, lambda_t});
        py::dict out;
        out["loss"] = g.loss;
        out["grad_visual"] = g.grad_visual;
        out["grad_textual"] = g.grad_textual;
        out["grad_log_tau"] = g.grad_log_tau;
        return out;
      },
      py::arg("visual"), py::arg("text"), py::arg("visual_gen"), py::arg("text_gen"), py::arg("w_visual"),
      py::arg("w_textual"), py::arg("tau") = 0.01, py::arg("lambda_v") = 0.05, py::arg("lambda_t") = 0.1);

  // Correlation statistics.
  m.def(
      "kendall_tau_b",
      [](const std::vector<double>& x, const std::vector<double>& y) { return kendall_tau_b(x, y); },
      py::arg("x"), py::arg("y"));
  m.def(
      "kendall_tau_c",
      [](const std::vector<double>& x, const std::vector<double>& y) { return kendall_tau_c(x, y); },
      py::arg("x"), py::arg("y"));
  m.def(
      "spearman_rho",
      [](const std::vector<double>& x, const std::vector<double>& y) { return spearman_rho(x, y); },
      py::arg("x"), py::arg("y"));

  // Container format, shared with the feature exporter.
  py::class_<EmbeddingContainer>(m, "Container")
      // Whether the container carries row labels is decided by the first append.
      .def(py::init([](const std::string& role, std::size_t cols, std::string metadata) {
             EmbeddingContainer c;
             c.role = parse_role(role);
             c.cols = cols;
             c.metadata = std::move(metadata);
             return c;
           }),
           py::arg("role"), py::arg("cols"), py::arg("metadata") = "")
      .def_property_readonly("role", [](const EmbeddingContainer& c) { return std::string(to_string(c.role)); })
      .def_property_readonly("rows", [](const EmbeddingContainer& c) { return c.rows; })
      .def_property_readonly("cols", [](const EmbeddingContainer& c) { return c.cols; })
      .def_readwrite("metadata", &EmbeddingContainer::metadata)
      .def("ids",
           [](const EmbeddingContainer& c) {
             std::vector<std::string> ids;
             for (const auto& e : c.entries) ids.push_back(e.id);
             return ids;
           })
      .def("block", &EmbeddingContainer::block, py::arg("id"))
      .def("labels", &EmbeddingContainer::labels, py::arg("id"))
      .def(
          "append",
          [](EmbeddingContainer& c, std::string id, const Eigen::MatrixXd& rows, std::vector<std::string> labels) {
            c.append(std::move(id), rows, labels);
          },
          py::arg("id"), py::arg("rows"), py::arg("labels") = std::vector<std::string>{})
      .def("encode",
           [](const EmbeddingContainer& c) {
             const auto bytes = encode_container(c);
             return py::bytes(reinterpret_cast<const char*>(bytes.data()), bytes.size());
           })
      .def("__len__", [](const EmbeddingContainer& c) { return c.entries.size(); })
      .def("__eq__", [](const EmbeddingContainer& a, const EmbeddingContainer& b) { return a == b; });
  m.def(
      "decode_container",
      [](const py::bytes& data) {
        const std::string s = data;
        return decode_container(std::span(reinterpret_cast<const std::uint8_t*>(s.data()), s.size()));
      },
      py::arg("data"));
  m.def("read_container", &read_container, py::arg("path"));
  m.def("write_container", &write_container, py::arg("container"), py::arg("path"));

  // Checkpoints: the exporter seeds training by writing initial heads here.
  m.def(
      "save_heads",
      [](const std::filesystem::path& path, const Eigen::MatrixXd& w_visual, const Eigen::MatrixXd& w_textual,
         double tau, double lambda_v, double lambda_t) {
        Checkpoint ck{make_heads(w_visual, w_textual)};
        ck.loss = LossConfig{tau, lambda_v, lambda_t};
        save_checkpoint(ck, path);
      },
      py::arg("path"), py::arg("w_visual"), py::arg("w_textual"), py::arg("tau") = 0.01,
      py::arg("lambda_v") = 0.05, py::arg("lambda_t") = 0.1,
      "Writes a checkpoint container usable as `pacs train --init`.");
  m.def(
      "load_heads",
      [](const std::filesystem::path& path) {
        const Checkpoint ck = load_checkpoint(path);
        py::dict out;
        out["w_visual"] = ck.heads.visual.weights();
        out["w_textual"] = ck.heads.textual.weights();
        out["tau"] = ck.loss.tau;
        out["lambda_v"] = ck.loss.lambda_v;
        out["lambda_t"] = ck.loss.lambda_t;
        out["iterations"] = ck.iterations;
        return out;
      },
      py::arg("path"));

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        const int code = cli_dispatch(args, out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs one `pacs` subcommand; returns (exit_code, stdout, stderr).");
}
