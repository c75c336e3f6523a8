#include "confbench/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "confbench/digest.hpp"
#include "confbench/errors.hpp"

namespace confbench {

namespace {

static_assert(std::endian::native == std::endian::little,
              "checkpoint blobs are little-endian; big-endian hosts need byte swaps");

std::filesystem::path blob_path_for(const std::filesystem::path& manifest_path) {
  std::filesystem::path p = manifest_path;
  p.replace_extension(".bin");
  return p;
}

std::string blob_digest(const std::vector<float>& blob) {
  const auto* bytes = reinterpret_cast<const unsigned char*>(blob.data());
  return sha256_hex(std::span<const unsigned char>(bytes, blob.size() * sizeof(float)));
}

}  // namespace

void write_checkpoint(const std::filesystem::path& manifest_path, nlohmann::json manifest,
                      const std::vector<Tensor*>& tensors) {
  std::vector<float> blob;
  nlohmann::json shapes = nlohmann::json::array();
  for (const Tensor* t : tensors) {
    shapes.push_back(t->shape);
    for (double v : t->data) blob.push_back(static_cast<float>(v));
  }

  const std::filesystem::path blob_path = blob_path_for(manifest_path);
  manifest["magic"] = kCheckpointMagic;
  manifest["version"] = kCheckpointVersion;
  manifest["tensors"] = shapes;
  manifest["blob"] = {{"file", blob_path.filename().string()},
                      {"values", blob.size()},
                      {"sha256", blob_digest(blob)}};

  std::ofstream mf(manifest_path);
  if (!mf) throw IoError("cannot write " + manifest_path.string());
  mf << manifest.dump(2) << "\n";
  mf.close();
  if (!mf) throw IoError("write failed for " + manifest_path.string());

  std::ofstream bf(blob_path, std::ios::binary);
  if (!bf) throw IoError("cannot write " + blob_path.string());
  bf.write(reinterpret_cast<const char*>(blob.data()),
           static_cast<std::streamsize>(blob.size() * sizeof(float)));
  bf.close();
  if (!bf) throw IoError("write failed for " + blob_path.string());
}

CheckpointPayload read_checkpoint(const std::filesystem::path& manifest_path) {
  std::ifstream mf(manifest_path);
  if (!mf) throw IoError("cannot open " + manifest_path.string());

  CheckpointPayload payload;
  try {
    payload.manifest = nlohmann::json::parse(mf);
  } catch (const nlohmann::json::parse_error& err) {
    throw FormatError("checkpoint manifest " + manifest_path.string() + ": " + err.what());
  }

  const auto& manifest = payload.manifest;
  if (!manifest.contains("magic") || manifest["magic"] != kCheckpointMagic) {
    throw FormatError("checkpoint " + manifest_path.string() + ": bad magic");
  }
  if (manifest.value("version", -1) != kCheckpointVersion) {
    throw FormatError("checkpoint " + manifest_path.string() + ": unsupported version");
  }

  const std::filesystem::path blob_path =
      manifest_path.parent_path() / manifest.at("blob").at("file").get<std::string>();
  const std::size_t values = manifest.at("blob").at("values").get<std::size_t>();

  std::ifstream bf(blob_path, std::ios::binary | std::ios::ate);
  if (!bf) throw IoError("cannot open " + blob_path.string());
  const auto bytes = static_cast<std::size_t>(bf.tellg());
  if (bytes != values * sizeof(float)) {
    throw FormatError("checkpoint blob " + blob_path.string() + ": expected " +
                      std::to_string(values * sizeof(float)) + " bytes, found " +
                      std::to_string(bytes));
  }
  payload.blob.resize(values);
  bf.seekg(0);
  bf.read(reinterpret_cast<char*>(payload.blob.data()), static_cast<std::streamsize>(bytes));
  if (!bf) throw IoError("read failed for " + blob_path.string());

  if (blob_digest(payload.blob) != manifest.at("blob").at("sha256").get<std::string>()) {
    throw FormatError("checkpoint blob " + blob_path.string() + ": digest mismatch");
  }

  std::size_t expected = 0;
  for (const auto& shape : manifest.at("tensors")) {
    std::size_t n = 1;
    for (const auto& d : shape) n *= d.get<std::size_t>();
    expected += n;
  }
  if (expected != values) {
    throw FormatError("checkpoint " + manifest_path.string() + ": tensor shapes need " +
                      std::to_string(expected) + " values, blob holds " +
                      std::to_string(values));
  }
  return payload;
}

void fill_parameters(const std::vector<Tensor*>& params, const CheckpointPayload& payload) {
  std::size_t total = 0;
  for (const Tensor* p : params) total += p->size();
  if (total != payload.blob.size()) {
    throw FormatError("checkpoint holds " + std::to_string(payload.blob.size()) +
                      " values, model needs " + std::to_string(total));
  }
  std::size_t offset = 0;
  for (Tensor* p : params) {
    for (double& v : p->data) v = static_cast<double>(payload.blob[offset++]);
  }
}

void save_classifier(const TrainedClassifier& model, const std::filesystem::path& path) {
  nlohmann::json manifest;
  manifest["kind"] = "classifier";
  manifest["arch"] = arch_to_string(model.spec.arch);
  manifest["input_shape"] = model.spec.input_shape;
  manifest["hidden"] = model.spec.hidden;
  manifest["num_classes"] = model.spec.num_classes;
  manifest["dropout_rate"] = model.spec.dropout_rate;
  manifest["seed"] = model.seed;
  nlohmann::json log = nlohmann::json::array();
  for (const EpochStats& s : model.log) {
    log.push_back({{"epoch", s.epoch},
                   {"train_loss", s.train_loss},
                   {"train_accuracy", s.train_accuracy},
                   {"val_accuracy", s.val_accuracy}});
  }
  manifest["log"] = log;
  write_checkpoint(path, std::move(manifest), model.parameters());
}

TrainedClassifier load_classifier(const std::filesystem::path& path) {
  const CheckpointPayload payload = read_checkpoint(path);
  const auto& manifest = payload.manifest;
  if (manifest.value("kind", "") != "classifier") {
    throw FormatError("checkpoint " + path.string() + ": kind is not 'classifier'");
  }

  ClassifierSpec spec;
  try {
    spec.arch = arch_from_string(manifest.at("arch").get<std::string>());
    spec.input_shape = manifest.at("input_shape").get<std::vector<std::size_t>>();
    spec.hidden = manifest.at("hidden").get<std::vector<std::size_t>>();
    spec.num_classes = manifest.at("num_classes").get<int>();
    spec.dropout_rate = manifest.at("dropout_rate").get<double>();
  } catch (const nlohmann::json::exception& err) {
    throw FormatError("checkpoint " + path.string() + ": " + err.what());
  }

  TrainedClassifier model = build_classifier(spec, manifest.at("seed").get<std::uint64_t>());
  fill_parameters(model.parameters(), payload);
  for (const auto& entry : manifest.value("log", nlohmann::json::array())) {
    EpochStats s;
    s.epoch = entry.at("epoch").get<int>();
    s.train_loss = entry.at("train_loss").get<double>();
    s.train_accuracy = entry.at("train_accuracy").get<double>();
    s.val_accuracy = entry.at("val_accuracy").get<double>();
    model.log.push_back(s);
  }
  return model;
}

}  // namespace confbench
