#pragma once

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <string>

#include "riffle/deck.hpp"
#include "riffle/descent_poly.hpp"
#include "riffle/error.hpp"

namespace riffle {

// Text record for a (possibly partial) descent histogram:
//
//   riffle-histogram v1
//   source <deck expression>
//   target <deck expression>
//   samples <l>
//   seed <seed>
//   streams <stream count>
//   streams_done <streams already merged>
//   gamma <g_0> <g_1> ... <g_{n-1}>
//
// A record with streams_done < streams is a checkpoint; `samples` is the
// requested total and the gamma array covers the finished streams only.
struct HistogramRecord {
  DescentHistogram histogram;   // histogram.samples = samples merged so far
  std::uint64_t requested = 0;  // target l
  std::uint32_t streams_done = 0;

  bool complete() const { return streams_done == histogram.streams; }
};

inline constexpr const char* kHistogramMagic = "riffle-histogram v1";

inline std::string format_histogram_record(const HistogramRecord& r) {
  std::ostringstream out;
  out << kHistogramMagic << '\n'
      << "source " << to_expression(r.histogram.source) << '\n'
      << "target " << to_expression(r.histogram.target) << '\n'
      << "samples " << r.requested << '\n'
      << "seed " << r.histogram.seed << '\n'
      << "streams " << r.histogram.streams << '\n'
      << "streams_done " << r.streams_done << '\n'
      << "gamma";
  for (auto g : r.histogram.counts) out << ' ' << g;
  out << '\n';
  return out.str();
}

inline HistogramRecord parse_histogram_record(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kHistogramMagic) throw ParseError("not a histogram record", 0);
  auto field = [&](const std::string& key) {
    if (!std::getline(in, line) || line.rfind(key + ' ', 0) != 0)
      throw ParseError("missing field '" + key + "'", static_cast<std::size_t>(in.tellg()));
    return line.substr(key.size() + 1);
  };
  HistogramRecord r;
  r.histogram.source = parse_deck(field("source"));
  r.histogram.target = parse_deck(field("target"));
  r.requested = std::stoull(field("samples"));
  r.histogram.seed = std::stoull(field("seed"));
  r.histogram.streams = static_cast<std::uint32_t>(std::stoul(field("streams")));
  r.streams_done = static_cast<std::uint32_t>(std::stoul(field("streams_done")));
  std::istringstream gammas(field("gamma"));
  std::uint64_t g;
  while (gammas >> g) r.histogram.counts.push_back(g);
  require_same_signature(r.histogram.source, r.histogram.target);
  if (r.histogram.counts.size() != r.histogram.source.size())
    throw ParseError("gamma array length differs from deck size", 0);
  if (r.histogram.streams == 0 || r.streams_done > r.histogram.streams)
    throw ParseError("inconsistent stream counts", 0);
  r.histogram.samples = r.histogram.total();
  std::uint64_t expected = 0;
  for (std::uint32_t s = 0; s < r.streams_done; ++s) expected += stream_share(r.requested, r.histogram.streams, s);
  if (expected != r.histogram.samples) throw ParseError("gamma total does not match finished streams", 0);
  return r;
}

// Writes to a sibling temporary file, then renames over the destination.
inline void write_file_atomically(const std::filesystem::path& path, const std::string& content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw Error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

inline std::optional<HistogramRecord> read_histogram_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_histogram_record(buf.str());
}

// Directory-backed cache of histograms keyed by (source, target, l, seed, streams).
class HistogramCache {
 public:
  static constexpr const char* kEnvVar = "RIFFLE_CACHE_DIR";

  explicit HistogramCache(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::filesystem::create_directories(dir_);
  }

  static std::optional<HistogramCache> from_environment() {
    const char* dir = std::getenv(kEnvVar);
    if (dir == nullptr || *dir == '\0') return std::nullopt;
    return HistogramCache(dir);
  }

  const std::filesystem::path& directory() const { return dir_; }

  std::filesystem::path path_for(const Deck& source, const Deck& target, std::uint64_t samples,
                                 std::uint64_t seed, std::uint32_t streams) const {
    const std::string key = to_expression(source) + '|' + to_expression(target) + '|' + std::to_string(samples) +
                            '|' + std::to_string(seed) + '|' + std::to_string(streams);
    // FNV-1a: stable across platforms, unlike std::hash
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : key) h = (h ^ c) * 0x100000001b3ULL;
    std::ostringstream name;
    name << "hist-" << std::hex << h << ".txt";
    return dir_ / name.str();
  }

  // Returns the cached record only when it matches the request exactly.
  std::optional<HistogramRecord> lookup(const Deck& source, const Deck& target, std::uint64_t samples,
                                        std::uint64_t seed, std::uint32_t streams) const {
    auto r = read_histogram_file(path_for(source, target, samples, seed, streams));
    if (!r) return std::nullopt;
    const auto& h = r->histogram;
    if (h.source != source || h.target != target || r->requested != samples || h.seed != seed ||
        h.streams != streams)
      return std::nullopt;
    return r;
  }

  void store(const HistogramRecord& r) const {
    const auto& h = r.histogram;
    write_file_atomically(path_for(h.source, h.target, r.requested, h.seed, h.streams), format_histogram_record(r));
  }

 private:
  std::filesystem::path dir_;
};

struct HistogramRunOptions {
  unsigned threads = 1;
  std::uint32_t streams = kDefaultStreamCount;
  // Streams merged between checkpoints; 0 disables checkpointing.
  std::uint32_t checkpoint_streams = 0;
  bool cache_only = false;
};

// Histogram for (source, target, l, seed), reusing and resuming cached
// records. Checkpoints are written every `checkpoint_streams` streams.
inline DescentHistogram cached_histogram(const HistogramCache* cache, const Deck& source, const Deck& target,
                                         std::uint64_t samples, std::uint64_t seed,
                                         const HistogramRunOptions& opt = {}) {
  require_same_signature(source, target);
  if (samples == 0) throw Error("histogram needs at least one sample");
  HistogramRecord r;
  if (cache != nullptr) {
    if (auto hit = cache->lookup(source, target, samples, seed, opt.streams)) r = std::move(*hit);
  }
  if (r.histogram.counts.empty()) {
    if (opt.cache_only) throw Infeasible("histogram not in cache for " + to_expression(source));
    r.histogram = DescentHistogram{source, target, std::vector<std::uint64_t>(source.size(), 0), 0, seed, opt.streams};
    r.requested = samples;
  }
  if (!r.complete() && opt.cache_only) throw Infeasible("cached histogram is incomplete");
  const std::uint32_t quantum = opt.checkpoint_streams == 0 ? opt.streams : opt.checkpoint_streams;
  while (!r.complete()) {
    const std::uint32_t last = std::min(opt.streams, r.streams_done + quantum);
    accumulate_histogram_streams(r.histogram, r.streams_done, last, samples, opt.threads);
    r.streams_done = last;
    if (cache != nullptr) cache->store(r);
  }
  return r.histogram;
}

}  // namespace riffle
