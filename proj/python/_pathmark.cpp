#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "pathmark/classifier.hpp"
#include "pathmark/ingest.hpp"
#include "pathmark/pipeline.hpp"
#include "pathmark/service.hpp"
#include "pathmark/synth.hpp"

namespace py = pybind11;

namespace pathmark {
namespace {

std::string as_bytes(const py::object& data) {
  if (py::isinstance<py::bytes>(data)) return data.cast<std::string>();
  if (py::isinstance<py::str>(data)) return data.cast<std::string>();
  throw py::type_error("model data must be bytes or str");
}

py::object loads(const std::string& text) { return py::module_::import("json").attr("loads")(text); }

// Service responses become Python objects; failures raise with the message.
py::object unwrap(const HttpResponse& r) {
  auto body = loads(r.body);
  if (r.status == 200) return body;
  const auto message = py::str(body["error"]).cast<std::string>();
  if (r.status == 404) throw py::key_error(message);
  if (r.status >= 500) throw std::runtime_error(message);
  throw py::value_error(message);
}

class PyIndex {
 public:
  PyIndex(const std::filesystem::path& path, bool writable)
      : dir_(writable ? IndexDirectory::open_writer(path) : IndexDirectory::open_reader(path)) {}

  py::dict add_directory(const std::filesystem::path& corpus, const std::string& model_type,
                         const std::vector<std::string>& include, std::size_t workers) {
    if (!dir_.writable()) throw py::value_error("index was opened read-only");
    IndexReport report;
    {
      py::gil_scoped_release release;
      auto manifest = crawl_directory(corpus, model_type, include);
      IngestOptions opt;
      opt.workers = workers;
      report = index_corpus(dir_, manifest, opt);
    }
    return loads(report.to_json());
  }

  py::object search(const py::object& data, const std::string& model_type, const std::string& filename,
                    std::size_t max_results, bool explain) {
    SearchRequest req{as_bytes(data), filename, model_type, max_results, explain};
    HttpResponse r;
    {
      py::gil_scoped_release release;
      r = service().search(req);
    }
    return unwrap(r);
  }

  py::object classify(const py::object& data, const std::string& model_type,
                      const std::map<std::string, std::string>& labels, std::size_t k, const std::string& filename) {
    if (k == 0) throw py::value_error("k must be positive");
    ClassifyRequest req{as_bytes(data), filename, model_type, k};
    HttpResponse r;
    {
      py::gil_scoped_release release;
      auto svc = service();
      svc.set_labels(LabeledCorpus{labels});
      r = svc.classify(req);
    }
    return unwrap(r);
  }

  py::tuple model(const std::string& id, const std::string& model_type) {
    auto r = service().model(id, model_type);
    if (r.status != 200) unwrap(r);
    py::dict meta;
    for (const auto& [k, v] : r.headers) meta[py::str(k)] = v;
    meta["content_type"] = r.content_type;
    return py::make_tuple(py::bytes(r.body), meta);
  }

  py::object stats() { return unwrap(service().stats()); }

  std::vector<std::pair<std::string, std::string>> audit(const std::string& model_type,
                                                         const std::vector<std::string>& ids) {
    std::vector<std::pair<std::string, std::string>> out;
    py::gil_scoped_release release;
    for (auto& m : audit_models(dir_, model_type, ids)) out.emplace_back(m.model_id, m.detail);
    return out;
  }

  std::vector<std::string> model_types() const { return dir_.meta().model_types; }
  std::filesystem::path path() const { return dir_.path(); }

 private:
  SearchService service() const {
    return SearchService(dir_.store(), dir_.meta(), ServiceOptions{}, dir_.path() / "meta.json");
  }

  IndexDirectory dir_;
};

std::map<std::string, std::uint64_t> bag_of_path_texts(const py::object& data, const std::string& filename,
                                                       int max_path_length, bool normalize) {
  FilterConfig filter;
  filter.max_path_length = max_path_length;
  const auto model = parse_model_file_contents(as_bytes(data), filename);
  const auto bop = normalize ? EncodePipeline(filter).encode(model) : model_to_bop(model, filter);
  std::map<std::string, std::uint64_t> out;
  for (const auto& [p, n] : bop) out[p.to_string()] += n;
  return out;
}

}  // namespace
}  // namespace pathmark

PYBIND11_MODULE(_pathmark, m) {
  using namespace pathmark;
  m.doc() = "Structure-based model search: bags of paths ranked with BM25";

  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<UnsupportedFeatureError>(m, "UnsupportedFeatureError", PyExc_ValueError);
  py::register_exception<StorageError>(m, "StorageError", PyExc_RuntimeError);
  py::register_exception<NotFoundError>(m, "NotFoundError", PyExc_LookupError);
  py::register_exception<UnclassifiableError>(m, "UnclassifiableError", PyExc_ValueError);
  py::register_exception<ContractError>(m, "ContractError", PyExc_ValueError);

  m.def(
      "parse_model",
      [](const py::object& data, const std::string& filename) {
        return loads(serialize_model_json(parse_model_file_contents(as_bytes(data), filename)));
      },
      py::arg("data"), py::arg("filename") = "model.json",
      "Parses canonical JSON or XMI and returns the canonical JSON form as a dict.");

  m.def("extract_paths", &bag_of_path_texts, py::arg("data"), py::arg("filename") = "model.json",
        py::arg("max_path_length") = 4, py::arg("normalize") = true,
        "Bag of paths of a model as {path text: count}.");

  m.def(
      "normalize_label", [](const std::string& text) { return Normalizer().normalize_label(text); },
      py::arg("text"), "Tokens of a label after splitting, stop-word removal and stemming.");

  m.def(
      "bm25_term",
      [](std::uint64_t c_q, std::uint64_t c_m, std::uint64_t length, double avdl, std::uint64_t t,
         std::uint64_t df, double b, double z) { return bm25_term(c_q, c_m, length, avdl, t, df, {b, z}); },
      py::arg("c_q"), py::arg("c_m"), py::arg("length"), py::arg("avdl"), py::arg("t"), py::arg("df"),
      py::arg("b") = 0.75, py::arg("z") = 0.1);

  m.def(
      "synth_corpus",
      [](std::size_t models, std::uint64_t seed, std::size_t domains) {
        EcoreCorpusOptions opt;
        opt.models = models;
        opt.seed = seed;
        opt.domains = domains;
        std::vector<py::tuple> out;
        for (const auto& cm : generate_ecore_corpus(opt)) {
          out.push_back(py::make_tuple(cm.id, cm.label, serialize_model_json(cm.model)));
        }
        return out;
      },
      py::arg("models") = 500, py::arg("seed") = 42, py::arg("domains") = 12,
      "Synthetic Ecore-flavored models as (id, domain label, canonical JSON) tuples.");

  py::class_<PyIndex>(m, "Index")
      .def(py::init<const std::filesystem::path&, bool>(), py::arg("path"), py::arg("writable") = false)
      .def("add_directory", &PyIndex::add_directory, py::arg("corpus"), py::arg("model_type"),
           py::arg("include") = std::vector<std::string>{"**/*.json", "**/*.xmi", "**/*.ecore"},
           py::arg("workers") = 0)
      .def("search", &PyIndex::search, py::arg("data"), py::arg("model_type"), py::arg("filename") = "query.json",
           py::arg("max_results") = kDefaultMaxResults, py::arg("explain") = false)
      .def("classify", &PyIndex::classify, py::arg("data"), py::arg("model_type"), py::arg("labels"),
           py::arg("k") = 5, py::arg("filename") = "query.json")
      .def("model", &PyIndex::model, py::arg("id"), py::arg("model_type") = "")
      .def("stats", &PyIndex::stats)
      .def("audit", &PyIndex::audit, py::arg("model_type"), py::arg("ids"))
      .def_property_readonly("model_types", &PyIndex::model_types)
      .def_property_readonly("path", &PyIndex::path);
}
