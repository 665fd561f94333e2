/*
 * Copyright 2026 The OTS Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "ots/extractor.hpp"

#include <cerrno>
#include <cmath>
#include <csignal>
#include <map>
#include <thread>

#include <pthread.h>
#include <sys/wait.h>
#include <unistd.h>

#include "ots/error.hpp"
#include "ots/text_io.hpp"

namespace ots {
namespace {

struct ProcessResult {
  int exit_code = -1;
  std::string output;
};

void write_all(int fd, std::string_view data) {
  sigset_t block;
  sigemptyset(&block);
  sigaddset(&block, SIGPIPE);
  pthread_sigmask(SIG_BLOCK, &block, nullptr);
  while (!data.empty()) {
    const ssize_t n = ::write(fd, data.data(), data.size());
    if (n < 0) {
      if (errno == EINTR) continue;
      break;  // child closed its stdin; the reply check reports it
    }
    data.remove_prefix(static_cast<std::size_t>(n));
  }
  ::close(fd);
}

ProcessResult run_process(const std::string& command, const std::string& input) {
  int to_child[2];
  int from_child[2];
  if (::pipe(to_child) != 0) fail(ErrorKind::kExtractorFailure, "pipe failed");
  if (::pipe(from_child) != 0) {
    ::close(to_child[0]);
    ::close(to_child[1]);
    fail(ErrorKind::kExtractorFailure, "pipe failed");
  }
  const pid_t pid = ::fork();
  if (pid < 0) fail(ErrorKind::kExtractorFailure, "fork failed");
  if (pid == 0) {
    ::dup2(to_child[0], STDIN_FILENO);
    ::dup2(from_child[1], STDOUT_FILENO);
    ::close(to_child[0]);
    ::close(to_child[1]);
    ::close(from_child[0]);
    ::close(from_child[1]);
    ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    ::_exit(127);
  }
  ::close(to_child[0]);
  ::close(from_child[1]);

  std::thread writer(write_all, to_child[1], std::string_view(input));
  ProcessResult result;
  char buf[1 << 14];
  while (true) {
    const ssize_t n = ::read(from_child[0], buf, sizeof buf);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) break;
    result.output.append(buf, static_cast<std::size_t>(n));
  }
  ::close(from_child[0]);
  writer.join();

  int status = 0;
  while (::waitpid(pid, &status, 0) < 0 && errno == EINTR) {
  }
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : 128;
  return result;
}

std::vector<FeatureVector> protocol_session(
    const std::string& command, const std::vector<std::string>& ids,
    const std::string& request_text) {
  const ProcessResult result = run_process(command, request_text);
  if (result.exit_code != 0) {
    fail(ErrorKind::kExtractorFailure,
         "extractor exited with status " + std::to_string(result.exit_code));
  }
  std::map<std::string, std::size_t> slot;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (!slot.emplace(ids[i], i).second) {
      fail(ErrorKind::kProtocolViolation, "duplicate request id " + ids[i]);
    }
  }
  std::vector<std::optional<FeatureVector>> replies(ids.size());
  std::size_t start = 0;
  const std::string& out = result.output;
  while (start < out.size()) {
    std::size_t end = out.find('\n', start);
    if (end == std::string::npos) end = out.size();
    std::string_view line(out.data() + start, end - start);
    start = end + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    const std::size_t tab = line.find('\t');
    if (tab == std::string_view::npos) {
      fail(ErrorKind::kExtractorFailure, "malformed reply line");
    }
    const std::string id(line.substr(0, tab));
    const auto it = slot.find(id);
    if (it == slot.end()) {
      fail(ErrorKind::kProtocolViolation, "reply for unknown id " + id);
    }
    if (replies[it->second]) {
      fail(ErrorKind::kProtocolViolation, "duplicate reply for id " + id);
    }
    std::vector<double> values;
    try {
      for (auto f : text::split(line.substr(tab + 1), ',')) {
        values.push_back(text::parse_double(f, "reply " + id));
      }
      replies[it->second].emplace(std::move(values));
    } catch (const Error& e) {
      fail(ErrorKind::kExtractorFailure, e.what());
    }
  }
  std::vector<FeatureVector> vectors;
  vectors.reserve(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (!replies[i]) fail(ErrorKind::kProtocolViolation, "no reply for id " + ids[i]);
    if (!vectors.empty() && replies[i]->dim() != vectors.front().dim()) {
      fail(ErrorKind::kProtocolViolation,
           "reply dim mismatch for id " + ids[i] + ": " +
               std::to_string(replies[i]->dim()) + " vs " +
               std::to_string(vectors.front().dim()));
    }
    vectors.push_back(std::move(*replies[i]));
  }
  return vectors;
}

}  // namespace

ImageRef ImageRef::from_pixels(std::string id, PixelGrid grid) {
  ImageRef ref;
  ref.id = std::move(id);
  ref.size = grid.size();
  ref.pixels = std::make_shared<const PixelGrid>(std::move(grid));
  return ref;
}

ImageRef ImageRef::from_file(std::string id, std::filesystem::path path) {
  ImageRef ref;
  ref.id = std::move(id);
  ref.size = read_pgm_size(path);
  ref.path = std::move(path);
  return ref;
}

FeatureVector Extractor::extract_one(const ExtractionRequest& request) {
  auto out = extract_batch(std::span<const ExtractionRequest>(&request, 1));
  return std::move(out.front());
}

FileBackedExtractor::FileBackedExtractor(FeatureMatrix store, std::string source)
    : store_(std::move(store)), source_(std::move(source)) {}

std::vector<FeatureVector> FileBackedExtractor::extract_batch(
    std::span<const ExtractionRequest> requests) {
  std::vector<FeatureVector> out;
  out.reserve(requests.size());
  for (const auto& r : requests) {
    const auto row = store_.find(r.key);
    if (!row) fail(ErrorKind::kUnknownId, "no stored features for '" + r.key + "'");
    out.push_back(store_.row_vector(*row));
  }
  return out;
}

std::string FileBackedExtractor::binding() const { return "file:" + source_; }

ToyPixelExtractor::ToyPixelExtractor(int grid_cells) : grid_cells_(grid_cells) {
  if (grid_cells < 1) fail(ErrorKind::kInvalidArgument, "toy extractor needs g >= 1");
}

FeatureVector ToyPixelExtractor::compute(const PixelGrid& image,
                                         const TransformPlan& plan) const {
  const Rect r = plan.region(image.size());
  check_region(r, image.size());
  const int g = grid_cells_;
  std::vector<double> sums(static_cast<std::size_t>(g) * g, 0.0);
  std::vector<int> counts(sums.size(), 0);

  const double theta = plan.rotation_degrees * M_PI / 180.0;
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  const double cx = image.width() / 2.0;
  const double cy = image.height() / 2.0;

  auto sample = [&](int u, int v) {
    if (plan.is_plain()) return image.at(r.x + u, r.y + v);
    const int mu = plan.mirrored ? r.w - 1 - u : u;
    const double dx = r.x + mu + 0.5 - cx;
    const double dy = r.y + v + 0.5 - cy;
    // Inverse of a counterclockwise (as displayed) rotation.
    const double sx = cx + dx * c - dy * s;
    const double sy = cy + dx * s + dy * c;
    const int px = std::clamp(static_cast<int>(std::floor(sx)), 0, image.width() - 1);
    const int py = std::clamp(static_cast<int>(std::floor(sy)), 0, image.height() - 1);
    return image.at(px, py);
  };

  for (int v = 0; v < r.h; ++v) {
    const int row = static_cast<int>(static_cast<long long>(v) * g / r.h);
    for (int u = 0; u < r.w; ++u) {
      const int col = static_cast<int>(static_cast<long long>(u) * g / r.w);
      const std::size_t cell = static_cast<std::size_t>(row) * g + col;
      sums[cell] += sample(u, v);
      ++counts[cell];
    }
  }
  for (int row = 0; row < g; ++row) {
    for (int col = 0; col < g; ++col) {
      const std::size_t cell = static_cast<std::size_t>(row) * g + col;
      if (counts[cell] > 0) {
        sums[cell] /= counts[cell];
      } else {
        // Region narrower than the grid: take the pixel under the cell centre.
        const int u = static_cast<int>((col + 0.5) * r.w / g);
        const int v = static_cast<int>((row + 0.5) * r.h / g);
        sums[cell] = sample(u, v);
      }
    }
  }
  return FeatureVector(std::move(sums));
}

std::vector<FeatureVector> ToyPixelExtractor::extract_batch(
    std::span<const ExtractionRequest> requests) {
  std::vector<FeatureVector> out;
  out.reserve(requests.size());
  std::map<std::filesystem::path, std::shared_ptr<const PixelGrid>> loaded;
  for (const auto& r : requests) {
    if (r.image == nullptr) fail(ErrorKind::kInvalidArgument, "request without image");
    std::shared_ptr<const PixelGrid> pixels = r.image->pixels;
    if (!pixels) {
      auto& slot = loaded[r.image->path];
      if (!slot) slot = std::make_shared<const PixelGrid>(load_pgm(r.image->path));
      pixels = slot;
    }
    out.push_back(compute(*pixels, r.plan));
  }
  return out;
}

std::string ToyPixelExtractor::binding() const {
  return "toy:" + std::to_string(grid_cells_);
}

ExternalProcessExtractor::ExternalProcessExtractor(std::string command)
    : command_(std::move(command)) {
  if (command_.empty()) fail(ErrorKind::kInvalidArgument, "empty extractor command");
}

std::vector<FeatureVector> ExternalProcessExtractor::extract_batch(
    std::span<const ExtractionRequest> requests) {
  if (requests.empty()) return {};
  std::vector<std::string> ids;
  std::string text;
  for (const auto& r : requests) {
    if (r.image == nullptr) fail(ErrorKind::kInvalidArgument, "request without image");
    check_region(r.plan.region(r.image->size), r.image->size);
    ids.push_back(r.key);
    text += r.key + '\t' + r.image->path.string() + '\t' +
            format_region_field(r.plan, r.image->size) + '\n';
  }
  return protocol_session(command_, ids, text);
}

std::string ExternalProcessExtractor::binding() const { return "external:" + command_; }

FeatureMatrix load_features_any(const std::filesystem::path& path) {
  const std::string bytes = text::read_file(path);
  const bool binary = bytes.starts_with("FVEC1\n");
  return parse_features(bytes, binary ? FeatureFormat::kBinary : FeatureFormat::kTsv);
}

std::unique_ptr<Extractor> make_extractor(std::string_view binding) {
  const std::size_t colon = binding.find(':');
  if (colon == std::string_view::npos) {
    fail(ErrorKind::kInvalidArgument, "extractor binding needs kind:arg");
  }
  const std::string_view kind = binding.substr(0, colon);
  const std::string arg(binding.substr(colon + 1));
  if (kind == "toy") {
    return std::make_unique<ToyPixelExtractor>(
        static_cast<int>(text::parse_int(arg, "toy grid cells")));
  }
  if (kind == "file") {
    return std::make_unique<FileBackedExtractor>(load_features_any(arg), arg);
  }
  if (kind == "external") return std::make_unique<ExternalProcessExtractor>(arg);
  fail(ErrorKind::kInvalidArgument, "unknown extractor kind " + std::string(kind));
}

FeatureVector extract(Extractor& extractor, const ImageRef& image,
                      const Rect& region, bool square_mode) {
  check_region(region, image.size);
  const Rect effective =
      square_mode ? smallest_square_containing(region, image.size) : region;
  return extractor.extract_one({image.id, &image, region_plan(effective)});
}

FeatureMatrix external_protocol_roundtrip(
    const std::string& command, std::span<const ProtocolRequest> requests) {
  if (requests.empty()) fail(ErrorKind::kEmptyInput, "no protocol requests");
  std::vector<std::string> ids;
  std::string text;
  for (const auto& r : requests) {
    ids.push_back(r.id);
    text += r.id + '\t' + r.image_path.string() + '\t' +
            format_region_field(region_plan(r.region), {}) + '\n';
  }
  auto vectors = protocol_session(command, ids, text);
  FeatureMatrix out(vectors.front().dim());
  for (std::size_t i = 0; i < vectors.size(); ++i) out.append(ids[i], vectors[i]);
  return out;
}

}  // namespace ots
