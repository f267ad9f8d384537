#pragma once

// Embedding backends: a deterministic in-process mock and a subprocess
// speaking newline-delimited JSON over stdin/stdout.
//
// Wire protocol (version 1), one JSON object per line:
//   -> {"id":1,"op":"hello","protocol_version":1}
//   <- {"id":1,"ok":true,"protocol_version":1,"embedding_dim":512,
//       "model_id":"...","capabilities":{"text":true,"image":true,"adapt":false}}
//   -> {"id":2,"op":"embed_texts","texts":["a photo of a dog", ...]}
//   <- {"id":2,"ok":true,"vectors":[[...], ...]}
//   -> {"id":3,"op":"embed_images","paths":["/abs/path.png", ...]}
//   <- {"id":3,"ok":true,"vectors":[[...], ...]}
//   any failure:  <- {"id":N,"ok":false,"error":"message"}

#include <csignal>
#include <cstdio>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <fcntl.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <json.hpp>

#include "classify.hpp"
#include "common.hpp"

namespace shiftbench {

inline constexpr int kProtocolVersion = 1;

struct BackendHandshake {
  int protocol_version = kProtocolVersion;
  std::size_t embedding_dim = 0;
  std::string model_id;
  bool text = true, image = true, adapt = false;
};

struct TextQuery {
  std::string text;
  std::string class_name;
};

/// Image request. Metadata beyond `path` is only visible to in-process
/// backends (the mock); it never goes over the wire.
struct ImageQuery {
  std::string path;
  std::string sample_id;
  std::string category;
  std::optional<std::uint64_t> seed;
};

class EmbeddingBackend {
 public:
  virtual ~EmbeddingBackend() = default;
  virtual BackendHandshake hello() = 0;
  virtual std::vector<EmbeddingVector> embed_texts(std::span<const TextQuery> q) = 0;
  virtual std::vector<EmbeddingVector> embed_images(std::span<const ImageQuery> q) = 0;
  /// Identifier recorded in report metadata.
  virtual std::string id() const = 0;
};

/// Deterministic stand-in for a vision-language model.
///   oracle:   text -> seeded random unit vector of the class name; image ->
///             the same vector for its true class.
///   noise:    text as oracle; image -> seeded random vector from the sample
///             seed (or id) mixed with the run seed.
///   constant: every vector is e_0.
class MockBackend final : public EmbeddingBackend {
 public:
  enum class Mode { oracle, noise, constant };

  explicit MockBackend(Mode mode, std::uint64_t seed = 0, std::size_t dim = 64)
      : mode_(mode), seed_(seed), dim_(dim) {
    if (dim_ < 2) throw Error("mock backend needs dim >= 2");
  }

  static Mode parse_mode(std::string_view s) {
    if (s.empty() || s == "oracle") return Mode::oracle;
    if (s == "noise") return Mode::noise;
    if (s == "constant") return Mode::constant;
    throw Error(concat("unknown mock mode '", s, "' (oracle|noise|constant)"));
  }

  BackendHandshake hello() override {
    return {kProtocolVersion, dim_, id(), true, true, false};
  }

  std::vector<EmbeddingVector> embed_texts(std::span<const TextQuery> q) override {
    std::vector<EmbeddingVector> out;
    for (const auto& t : q) {
      ++text_calls_;
      out.push_back(mode_ == Mode::constant ? basis0() : class_vector(t.class_name));
    }
    return out;
  }

  std::vector<EmbeddingVector> embed_images(std::span<const ImageQuery> q) override {
    std::vector<EmbeddingVector> out;
    for (const auto& im : q) {
      switch (mode_) {
        case Mode::oracle: out.push_back(class_vector(im.category)); break;
        case Mode::constant: out.push_back(basis0()); break;
        case Mode::noise: {
          const std::uint64_t s = im.seed ? *im.seed : fnv1a64(im.sample_id);
          out.push_back(random_unit(derive_seed(seed_, {s, 0x1a6eu})));
          break;
        }
      }
    }
    return out;
  }

  std::string id() const override {
    switch (mode_) {
      case Mode::oracle: return "mock:oracle";
      case Mode::noise: return "mock:noise";
      case Mode::constant: return "mock:constant";
    }
    return "mock";
  }

  /// Number of individual text encodings performed so far.
  std::size_t text_calls() const { return text_calls_; }

 private:
  EmbeddingVector basis0() const {
    std::vector<double> v(dim_, 0.0);
    v[0] = 1.0;
    return {std::move(v)};
  }
  EmbeddingVector class_vector(const std::string& cls) const {
    return random_unit(derive_seed(0xc1a55u, {fnv1a64(cls)}));
  }
  EmbeddingVector random_unit(std::uint64_t seed) const {
    Rng rng(seed);
    std::vector<double> v(dim_);
    for (auto& x : v) x = rng.normal();
    return normalized(std::move(v));
  }

  Mode mode_;
  std::uint64_t seed_;
  std::size_t dim_;
  std::size_t text_calls_ = 0;
};

/// Child process speaking the wire protocol. One request in flight at a time.
class StdioBackend final : public EmbeddingBackend {
 public:
  explicit StdioBackend(std::string command) : command_(std::move(command)) {
    int to_child[2], from_child[2];
    if (pipe(to_child) != 0 || pipe(from_child) != 0) throw Error("pipe() failed");
    pid_ = fork();
    if (pid_ < 0) throw Error("fork() failed");
    if (pid_ == 0) {
      dup2(to_child[0], STDIN_FILENO);
      dup2(from_child[1], STDOUT_FILENO);
      close(to_child[0]); close(to_child[1]);
      close(from_child[0]); close(from_child[1]);
      execl("/bin/sh", "sh", "-c", command_.c_str(), static_cast<char*>(nullptr));
      _exit(127);
    }
    close(to_child[0]);
    close(from_child[1]);
    // A dead child must surface as a read/write error, not SIGPIPE.
    std::signal(SIGPIPE, SIG_IGN);
    in_ = fdopen(to_child[1], "w");
    out_ = fdopen(from_child[0], "r");
    if (!in_ || !out_) throw Error("fdopen() failed");
  }

  StdioBackend(const StdioBackend&) = delete;
  StdioBackend& operator=(const StdioBackend&) = delete;

  ~StdioBackend() override {
    if (in_) std::fclose(in_);
    if (out_) std::fclose(out_);
    if (pid_ > 0) {
      int status = 0;
      waitpid(pid_, &status, 0);
    }
  }

  BackendHandshake hello() override {
    const auto r = request({{"op", "hello"}, {"protocol_version", kProtocolVersion}});
    BackendHandshake h;
    h.protocol_version = r.value("protocol_version", kProtocolVersion);
    if (h.protocol_version != kProtocolVersion)
      throw Error(concat("backend speaks protocol ", h.protocol_version, ", expected ", kProtocolVersion));
    const long dim = r.at("embedding_dim").get<long>();
    if (dim <= 0) throw Error("backend reported non-positive embedding_dim");
    h.embedding_dim = static_cast<std::size_t>(dim);
    h.model_id = r.value("model_id", std::string("unknown"));
    if (r.contains("capabilities")) {
      const auto& c = r.at("capabilities");
      h.text = c.value("text", true);
      h.image = c.value("image", true);
      h.adapt = c.value("adapt", false);
    }
    dim_ = h.embedding_dim;
    model_id_ = h.model_id;
    return h;
  }

  std::vector<EmbeddingVector> embed_texts(std::span<const TextQuery> q) override {
    nlohmann::json texts = nlohmann::json::array();
    for (const auto& t : q) texts.push_back(t.text);
    return vectors(request({{"op", "embed_texts"}, {"texts", texts}}), q.size());
  }

  std::vector<EmbeddingVector> embed_images(std::span<const ImageQuery> q) override {
    nlohmann::json paths = nlohmann::json::array();
    for (const auto& im : q) paths.push_back(im.path);
    return vectors(request({{"op", "embed_images"}, {"paths", paths}}), q.size());
  }

  std::string id() const override {
    return "stdio:" + command_ + (model_id_.empty() ? "" : " (" + model_id_ + ")");
  }

 private:
  nlohmann::json request(nlohmann::json msg) {
    const long id = ++next_id_;
    msg["id"] = id;
    const auto line = msg.dump() + "\n";
    if (std::fwrite(line.data(), 1, line.size(), in_) != line.size() || std::fflush(in_) != 0)
      throw Error(concat("backend '", command_, "' closed its input"));
    std::string reply;
    for (int ch; (ch = std::fgetc(out_)) != EOF && ch != '\n';) reply.push_back(static_cast<char>(ch));
    if (reply.empty()) throw Error(concat("backend '", command_, "' exited without a reply"));
    nlohmann::json r;
    try {
      r = nlohmann::json::parse(reply);
    } catch (const nlohmann::json::exception& e) {
      throw Error(concat("backend sent malformed reply: ", e.what()));
    }
    if (r.value("id", -1L) != id)
      throw Error(concat("backend reply id ", r.value("id", -1L), " does not match request ", id));
    if (!r.value("ok", false))
      throw Error(concat("backend error: ", r.value("error", std::string("unspecified"))));
    return r;
  }

  std::vector<EmbeddingVector> vectors(const nlohmann::json& r, std::size_t expected) const {
    const auto& arr = r.at("vectors");
    if (arr.size() != expected)
      throw Error(concat("backend returned ", arr.size(), " vectors for ", expected, " inputs"));
    std::vector<EmbeddingVector> out;
    for (const auto& v : arr) {
      EmbeddingVector e{v.get<std::vector<double>>()};
      if (dim_ && e.dim() != dim_)
        throw Error(concat("backend vector has dim ", e.dim(), ", handshake said ", dim_));
      check_unit(e, "backend");
      out.push_back(std::move(e));
    }
    return out;
  }

  std::string command_;
  pid_t pid_ = -1;
  std::FILE* in_ = nullptr;
  std::FILE* out_ = nullptr;
  long next_id_ = 0;
  std::size_t dim_ = 0;
  std::string model_id_;
};

/// "mock", "mock:oracle|noise|constant" or "stdio:<shell command>".
inline std::unique_ptr<EmbeddingBackend> make_backend(const std::string& spec,
                                                      std::uint64_t seed = 0) {
  if (spec == "mock" || spec.rfind("mock:", 0) == 0) {
    const auto mode = spec == "mock" ? std::string{} : spec.substr(5);
    return std::make_unique<MockBackend>(MockBackend::parse_mode(mode), seed);
  }
  if (spec.rfind("stdio:", 0) == 0) {
    const auto cmd = spec.substr(6);
    if (cmd.empty()) throw Error("stdio backend needs a command");
    return std::make_unique<StdioBackend>(cmd);
  }
  throw Error(concat("unknown backend '", spec, "' (mock[:mode] | stdio:<cmd>)"));
}

}  // namespace shiftbench
