#pragma once

// Reader and writer for COLMAP sparse models (cameras, images, points3D) in
// the binary (.bin) and text (.txt) layouts COLMAP itself produces.

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <future>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "ghost/camera.hpp"
#include "ghost/error.hpp"
#include "ghost/geometry.hpp"

namespace ghost {

inline constexpr std::uint64_t kInvalidPoint3DId =
    std::numeric_limits<std::uint64_t>::max();

struct Observation {
  double u = 0.0;
  double v = 0.0;
  std::uint64_t point3d_id = kInvalidPoint3DId;

  bool tracked() const { return point3d_id != kInvalidPoint3DId; }
  bool operator==(const Observation&) const = default;
};

struct FramePose {
  std::uint32_t image_id = 0;
  std::uint32_t camera_id = 0;
  RigidPose pose;  // world-to-camera
  std::string name;
  std::vector<Observation> observations;

  bool operator==(const FramePose&) const = default;
};

struct TrackElement {
  std::uint32_t image_id = 0;
  std::uint32_t point2d_idx = 0;

  bool operator==(const TrackElement&) const = default;
};

struct Point3D {
  std::uint64_t point3d_id = 0;
  Vec3 xyz = Vec3::Zero();
  std::array<std::uint8_t, 3> color{0, 0, 0};
  double error = 0.0;
  std::vector<TrackElement> track;

  bool operator==(const Point3D& o) const {
    return point3d_id == o.point3d_id && xyz == o.xyz && color == o.color &&
           error == o.error && track == o.track;
  }
};

struct SparseReconstruction {
  std::map<std::uint32_t, CameraIntrinsics> cameras;
  std::map<std::uint32_t, FramePose> frames;
  std::map<std::uint64_t, Point3D> points;

  bool empty() const {
    return cameras.empty() && frames.empty() && points.empty();
  }
  bool operator==(const SparseReconstruction&) const = default;

  const FramePose& frame(std::uint32_t image_id) const {
    const auto it = frames.find(image_id);
    if (it == frames.end()) {
      throw Error("frame " + std::to_string(image_id) + " is not registered");
    }
    return it->second;
  }
  const CameraIntrinsics& camera_of(const FramePose& f) const {
    const auto it = cameras.find(f.camera_id);
    if (it == cameras.end()) {
      throw DanglingReferenceError("frame references missing camera",
                                   {f.camera_id});
    }
    return it->second;
  }
};

// Temporal ordering of the registered frames. Frames are sorted by name;
// `index` is the frame's position on the video timeline, taken from the
// trailing integer of the file stem when every name carries one (so gaps
// left by unregistered frames are visible), else the sorted rank.
class Timeline {
 public:
  explicit Timeline(const SparseReconstruction& recon) {
    order_.reserve(recon.frames.size());
    for (const auto& [id, frame] : recon.frames) order_.push_back(id);
    std::sort(order_.begin(), order_.end(), [&](auto a, auto b) {
      const auto& na = recon.frames.at(a).name;
      const auto& nb = recon.frames.at(b).name;
      return na != nb ? na < nb : a < b;
    });
    std::vector<std::int64_t> numbers;
    numbers.reserve(order_.size());
    bool numbered = true;
    for (const auto id : order_) {
      const auto n = trailing_number(recon.frames.at(id).name);
      if (!n) {
        numbered = false;
        break;
      }
      numbers.push_back(*n);
    }
    // Trailing numbers must follow the name order to be usable.
    if (numbered && !std::is_sorted(numbers.begin(), numbers.end())) {
      numbered = false;
    }
    if (numbered &&
        std::adjacent_find(numbers.begin(), numbers.end()) != numbers.end()) {
      numbered = false;
    }
    index_.reserve(order_.size());
    for (std::size_t i = 0; i < order_.size(); ++i) {
      const std::int64_t idx =
          numbered ? numbers[i] : static_cast<std::int64_t>(i);
      index_.push_back(idx);
      position_[order_[i]] = i;
    }
  }

  // Registered frame ids in temporal order.
  const std::vector<std::uint32_t>& order() const { return order_; }
  std::size_t size() const { return order_.size(); }

  std::size_t position(std::uint32_t image_id) const {
    const auto it = position_.find(image_id);
    if (it == position_.end()) {
      throw Error("frame " + std::to_string(image_id) + " is not registered");
    }
    return it->second;
  }
  std::int64_t index_at(std::size_t position) const { return index_[position]; }
  std::int64_t index(std::uint32_t image_id) const {
    return index_[position(image_id)];
  }
  std::int64_t last_index() const {
    return index_.empty() ? -1 : index_.back();
  }

  static std::optional<std::int64_t> trailing_number(const std::string& name) {
    const std::string stem = std::filesystem::path(name).stem().string();
    std::size_t end = stem.size();
    std::size_t begin = end;
    while (begin > 0 && stem[begin - 1] >= '0' && stem[begin - 1] <= '9') {
      --begin;
    }
    if (begin == end || end - begin > 18) return std::nullopt;
    std::int64_t value = 0;
    std::from_chars(stem.data() + begin, stem.data() + end, value);
    return value;
  }

 private:
  std::vector<std::uint32_t> order_;
  std::vector<std::int64_t> index_;
  std::map<std::uint32_t, std::size_t> position_;
};

enum class ModelFormat { kAuto, kBinary, kText };

using WarningSink = std::function<void(const std::string&)>;

namespace detail {

// ---------------------------------------------------------------- binary

class ByteReader {
 public:
  ByteReader(std::string file, std::span<const char> bytes)
      : file_(std::move(file)), bytes_(bytes) {}

  std::uint64_t offset() const { return pos_; }
  bool at_end() const { return pos_ == bytes_.size(); }

  template <typename T>
  T read(const char* what) {
    if (bytes_.size() - pos_ < sizeof(T)) {
      throw ParseError(file_, pos_,
                       std::string("truncated while reading ") + what);
    }
    std::array<unsigned char, sizeof(T)> raw;
    std::memcpy(raw.data(), bytes_.data() + pos_, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) {
      std::reverse(raw.begin(), raw.end());
    }
    T value;
    std::memcpy(&value, raw.data(), sizeof(T));
    pos_ += sizeof(T);
    return value;
  }

  std::string read_cstring(const char* what) {
    const auto* begin = bytes_.data() + pos_;
    const auto* end = bytes_.data() + bytes_.size();
    const auto* nul = std::find(begin, end, '\0');
    if (nul == end) {
      throw ParseError(file_, pos_,
                       std::string("unterminated string in ") + what);
    }
    std::string s(begin, nul);
    pos_ += s.size() + 1;
    return s;
  }

  // Guards element counts against allocation blow-ups on corrupt input.
  std::uint64_t read_count(std::size_t min_element_bytes, const char* what) {
    const auto start = pos_;
    const auto n = read<std::uint64_t>(what);
    if (min_element_bytes > 0 &&
        n > (bytes_.size() - pos_) / min_element_bytes) {
      throw ParseError(file_, start,
                       std::string("count exceeds remaining bytes in ") + what);
    }
    return n;
  }

  [[noreturn]] void fail(std::uint64_t at, const std::string& what) const {
    throw ParseError(file_, at, what);
  }

 private:
  std::string file_;
  std::span<const char> bytes_;
  std::uint64_t pos_ = 0;
};

class ByteWriter {
 public:
  template <typename T>
  void write(T value) {
    std::array<unsigned char, sizeof(T)> raw;
    std::memcpy(raw.data(), &value, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) {
      std::reverse(raw.begin(), raw.end());
    }
    out_.append(reinterpret_cast<const char*>(raw.data()), raw.size());
  }
  void write_cstring(const std::string& s) {
    out_.append(s);
    out_.push_back('\0');
  }
  const std::string& bytes() const { return out_; }

 private:
  std::string out_;
};

inline std::vector<char> slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void spit(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("write failed: " + path.string());
}

// Byte offsets of each record, used to position cross-reference errors.
struct RecordOffsets {
  std::string images_file;
  std::string points_file;
  std::map<std::uint32_t, std::uint64_t> images;
  std::map<std::uint64_t, std::uint64_t> points;
};

inline void parse_cameras_binary(const std::string& file,
                                 std::span<const char> bytes,
                                 SparseReconstruction& recon) {
  ByteReader in(file, bytes);
  const auto n = in.read_count(24, "camera count");
  for (std::uint64_t i = 0; i < n; ++i) {
    const auto record = in.offset();
    CameraIntrinsics cam;
    cam.camera_id = in.read<std::uint32_t>("camera_id");
    const auto model_id = in.read<std::int32_t>("model_id");
    const auto model = camera_model_from_id(model_id);
    if (!model) {
      // The binary layout does not store the parameter count, so the record
      // length of an unknown model cannot be recovered.
      in.fail(record, "unknown camera model id " + std::to_string(model_id));
    }
    cam.model = *model;
    cam.model_name = std::string(camera_model_name(cam.model));
    cam.width = in.read<std::uint64_t>("width");
    cam.height = in.read<std::uint64_t>("height");
    const auto np = *camera_model_num_params(cam.model);
    cam.params.resize(np);
    for (auto& p : cam.params) p = in.read<double>("camera params");
    if (!recon.cameras.emplace(cam.camera_id, std::move(cam)).second) {
      in.fail(record, "duplicate camera_id");
    }
  }
  if (!in.at_end()) in.fail(in.offset(), "trailing bytes after last camera");
}

inline void parse_images_binary(const std::string& file,
                                std::span<const char> bytes,
                                SparseReconstruction& recon,
                                RecordOffsets& offsets) {
  ByteReader in(file, bytes);
  const auto n = in.read_count(73, "image count");
  for (std::uint64_t i = 0; i < n; ++i) {
    const auto record = in.offset();
    FramePose frame;
    frame.image_id = in.read<std::uint32_t>("image_id");
    frame.pose.q.w = in.read<double>("qw");
    frame.pose.q.x = in.read<double>("qx");
    frame.pose.q.y = in.read<double>("qy");
    frame.pose.q.z = in.read<double>("qz");
    frame.pose.t.x() = in.read<double>("tx");
    frame.pose.t.y() = in.read<double>("ty");
    frame.pose.t.z() = in.read<double>("tz");
    frame.camera_id = in.read<std::uint32_t>("camera_id");
    frame.name = in.read_cstring("image name");
    const auto np = in.read_count(24, "points2D count");
    frame.observations.resize(np);
    for (auto& obs : frame.observations) {
      obs.u = in.read<double>("point2D x");
      obs.v = in.read<double>("point2D y");
      obs.point3d_id = in.read<std::uint64_t>("point3D_id");
    }
    offsets.images[frame.image_id] = record;
    if (!recon.frames.emplace(frame.image_id, std::move(frame)).second) {
      in.fail(record, "duplicate image_id");
    }
  }
  if (!in.at_end()) in.fail(in.offset(), "trailing bytes after last image");
}

inline void parse_points_binary(const std::string& file,
                                std::span<const char> bytes,
                                SparseReconstruction& recon,
                                RecordOffsets& offsets) {
  ByteReader in(file, bytes);
  const auto n = in.read_count(51, "point count");
  for (std::uint64_t i = 0; i < n; ++i) {
    const auto record = in.offset();
    Point3D pt;
    pt.point3d_id = in.read<std::uint64_t>("point3D_id");
    pt.xyz.x() = in.read<double>("x");
    pt.xyz.y() = in.read<double>("y");
    pt.xyz.z() = in.read<double>("z");
    for (auto& c : pt.color) c = in.read<std::uint8_t>("color");
    pt.error = in.read<double>("error");
    const auto nt = in.read_count(8, "track length");
    pt.track.resize(nt);
    for (auto& el : pt.track) {
      el.image_id = in.read<std::uint32_t>("track image_id");
      el.point2d_idx = in.read<std::uint32_t>("track point2D_idx");
    }
    offsets.points[pt.point3d_id] = record;
    if (!recon.points.emplace(pt.point3d_id, std::move(pt)).second) {
      in.fail(record, "duplicate point3D_id");
    }
  }
  if (!in.at_end()) in.fail(in.offset(), "trailing bytes after last point");
}

inline std::string cameras_to_binary(const SparseReconstruction& recon) {
  ByteWriter out;
  out.write<std::uint64_t>(recon.cameras.size());
  for (const auto& [id, cam] : recon.cameras) {
    out.write<std::uint32_t>(id);
    out.write<std::int32_t>(static_cast<std::int32_t>(cam.model));
    out.write<std::uint64_t>(cam.width);
    out.write<std::uint64_t>(cam.height);
    for (const double p : cam.params) out.write<double>(p);
  }
  return out.bytes();
}

inline std::string images_to_binary(const SparseReconstruction& recon) {
  ByteWriter out;
  out.write<std::uint64_t>(recon.frames.size());
  for (const auto& [id, f] : recon.frames) {
    out.write<std::uint32_t>(id);
    out.write<double>(f.pose.q.w);
    out.write<double>(f.pose.q.x);
    out.write<double>(f.pose.q.y);
    out.write<double>(f.pose.q.z);
    out.write<double>(f.pose.t.x());
    out.write<double>(f.pose.t.y());
    out.write<double>(f.pose.t.z());
    out.write<std::uint32_t>(f.camera_id);
    out.write_cstring(f.name);
    out.write<std::uint64_t>(f.observations.size());
    for (const auto& obs : f.observations) {
      out.write<double>(obs.u);
      out.write<double>(obs.v);
      out.write<std::uint64_t>(obs.point3d_id);
    }
  }
  return out.bytes();
}

inline std::string points_to_binary(const SparseReconstruction& recon) {
  ByteWriter out;
  out.write<std::uint64_t>(recon.points.size());
  for (const auto& [id, pt] : recon.points) {
    out.write<std::uint64_t>(id);
    out.write<double>(pt.xyz.x());
    out.write<double>(pt.xyz.y());
    out.write<double>(pt.xyz.z());
    for (const auto c : pt.color) out.write<std::uint8_t>(c);
    out.write<double>(pt.error);
    out.write<std::uint64_t>(pt.track.size());
    for (const auto& el : pt.track) {
      out.write<std::uint32_t>(el.image_id);
      out.write<std::uint32_t>(el.point2d_idx);
    }
  }
  return out.bytes();
}

// ------------------------------------------------------------------ text

// Shortest representation that parses back to the identical double.
inline void append_double(std::string& out, double v) {
  std::array<char, 32> buf;
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  out.append(buf.data(), res.ptr);
}

class LineCursor {
 public:
  LineCursor(std::string file, std::string_view text)
      : file_(std::move(file)), text_(text) {}

  // Next line that is neither blank nor a comment.
  bool next_record(std::string_view& line) {
    while (next_raw(line)) {
      const auto t = trim(line);
      if (!t.empty() && t.front() != '#') {
        line = t;
        return true;
      }
    }
    return false;
  }

  // Next physical line, blank or not.
  bool next_raw(std::string_view& line) {
    if (pos_ >= text_.size()) return false;
    line_start_ = pos_;
    auto end = text_.find('\n', pos_);
    if (end == std::string_view::npos) end = text_.size();
    line = text_.substr(pos_, end - pos_);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    pos_ = end + 1;
    return true;
  }

  std::uint64_t line_offset() const { return line_start_; }
  const std::string& file() const { return file_; }

  static std::string_view trim(std::string_view s) {
    const auto ws = " \t\r\n";
    const auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
  }

 private:
  std::string file_;
  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_start_ = 0;
};

class Tokens {
 public:
  Tokens(const LineCursor& cursor, std::string_view line)
      : cursor_(cursor), line_(line) {}

  bool done() {
    skip_ws();
    return pos_ >= line_.size();
  }

  std::string_view next(const char* what) {
    skip_ws();
    if (pos_ >= line_.size()) fail(std::string("missing ") + what);
    const auto b = pos_;
    while (pos_ < line_.size() && line_[pos_] != ' ' && line_[pos_] != '\t') {
      ++pos_;
    }
    return line_.substr(b, pos_ - b);
  }

  std::string_view rest() {
    skip_ws();
    auto r = LineCursor::trim(line_.substr(pos_));
    pos_ = line_.size();
    return r;
  }

  template <typename T>
  T number(const char* what) {
    const auto tok = next(what);
    T value{};
    const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), value);
    if (res.ec != std::errc() || res.ptr != tok.data() + tok.size()) {
      fail(std::string("invalid ") + what + " '" + std::string(tok) + "'");
    }
    return value;
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError(cursor_.file(), cursor_.line_offset(), what);
  }

 private:
  void skip_ws() {
    while (pos_ < line_.size() && (line_[pos_] == ' ' || line_[pos_] == '\t')) {
      ++pos_;
    }
  }

  const LineCursor& cursor_;
  std::string_view line_;
  std::size_t pos_ = 0;
};

inline void parse_cameras_text(const std::string& file, std::string_view text,
                               SparseReconstruction& recon,
                               const WarningSink& warn) {
  LineCursor cur(file, text);
  std::string_view line;
  while (cur.next_record(line)) {
    Tokens tok(cur, line);
    CameraIntrinsics cam;
    cam.camera_id = tok.number<std::uint32_t>("CAMERA_ID");
    cam.model_name = std::string(tok.next("MODEL"));
    cam.model = camera_model_from_name(cam.model_name);
    cam.width = tok.number<std::uint64_t>("WIDTH");
    cam.height = tok.number<std::uint64_t>("HEIGHT");
    while (!tok.done()) cam.params.push_back(tok.number<double>("PARAMS"));
    if (const auto arity = camera_model_num_params(cam.model)) {
      if (cam.params.size() != *arity) {
        tok.fail(cam.model_name + " expects " + std::to_string(*arity) +
                 " params, got " + std::to_string(cam.params.size()));
      }
    } else if (warn) {
      warn(file + ": camera " + std::to_string(cam.camera_id) +
           " has unknown model '" + cam.model_name + "', parsed generically");
    }
    if (!recon.cameras.emplace(cam.camera_id, std::move(cam)).second) {
      tok.fail("duplicate camera_id");
    }
  }
}

inline void parse_images_text(const std::string& file, std::string_view text,
                              SparseReconstruction& recon,
                              RecordOffsets& offsets) {
  LineCursor cur(file, text);
  std::string_view line;
  while (cur.next_record(line)) {
    const auto record = cur.line_offset();
    Tokens tok(cur, line);
    FramePose frame;
    frame.image_id = tok.number<std::uint32_t>("IMAGE_ID");
    frame.pose.q.w = tok.number<double>("QW");
    frame.pose.q.x = tok.number<double>("QX");
    frame.pose.q.y = tok.number<double>("QY");
    frame.pose.q.z = tok.number<double>("QZ");
    frame.pose.t.x() = tok.number<double>("TX");
    frame.pose.t.y() = tok.number<double>("TY");
    frame.pose.t.z() = tok.number<double>("TZ");
    frame.camera_id = tok.number<std::uint32_t>("CAMERA_ID");
    frame.name = std::string(tok.rest());
    if (frame.name.empty()) tok.fail("missing NAME");

    std::string_view points_line;
    if (!cur.next_raw(points_line)) {
      tok.fail("missing POINTS2D line for image " +
               std::to_string(frame.image_id));
    }
    Tokens pts(cur, points_line);
    while (!pts.done()) {
      Observation obs;
      obs.u = pts.number<double>("POINTS2D x");
      obs.v = pts.number<double>("POINTS2D y");
      const auto id_tok = pts.next("POINT3D_ID");
      if (id_tok == "-1") {
        obs.point3d_id = kInvalidPoint3DId;
      } else {
        const auto res = std::from_chars(
            id_tok.data(), id_tok.data() + id_tok.size(), obs.point3d_id);
        if (res.ec != std::errc() || res.ptr != id_tok.data() + id_tok.size()) {
          pts.fail("invalid POINT3D_ID '" + std::string(id_tok) + "'");
        }
      }
      frame.observations.push_back(obs);
    }
    offsets.images[frame.image_id] = record;
    if (!recon.frames.emplace(frame.image_id, std::move(frame)).second) {
      throw ParseError(file, record, "duplicate image_id");
    }
  }
}

inline void parse_points_text(const std::string& file, std::string_view text,
                              SparseReconstruction& recon,
                              RecordOffsets& offsets) {
  LineCursor cur(file, text);
  std::string_view line;
  while (cur.next_record(line)) {
    Tokens tok(cur, line);
    Point3D pt;
    pt.point3d_id = tok.number<std::uint64_t>("POINT3D_ID");
    pt.xyz.x() = tok.number<double>("X");
    pt.xyz.y() = tok.number<double>("Y");
    pt.xyz.z() = tok.number<double>("Z");
    for (auto& c : pt.color) {
      const auto v = tok.number<unsigned>("RGB");
      if (v > 255) tok.fail("color component out of range");
      c = static_cast<std::uint8_t>(v);
    }
    pt.error = tok.number<double>("ERROR");
    while (!tok.done()) {
      TrackElement el;
      el.image_id = tok.number<std::uint32_t>("TRACK image_id");
      el.point2d_idx = tok.number<std::uint32_t>("TRACK point2D_idx");
      pt.track.push_back(el);
    }
    offsets.points[pt.point3d_id] = cur.line_offset();
    if (!recon.points.emplace(pt.point3d_id, std::move(pt)).second) {
      tok.fail("duplicate point3D_id");
    }
  }
}

inline std::string cameras_to_text(const SparseReconstruction& recon) {
  std::string out =
      "# Camera list with one line of data per camera:\n"
      "#   CAMERA_ID, MODEL, WIDTH, HEIGHT, PARAMS[]\n"
      "# Number of cameras: " +
      std::to_string(recon.cameras.size()) + "\n";
  for (const auto& [id, cam] : recon.cameras) {
    out += std::to_string(id) + " " + cam.name() + " " +
           std::to_string(cam.width) + " " + std::to_string(cam.height);
    for (const double p : cam.params) {
      out += ' ';
      append_double(out, p);
    }
    out += '\n';
  }
  return out;
}

inline std::string images_to_text(const SparseReconstruction& recon) {
  std::size_t n_obs = 0;
  for (const auto& [id, f] : recon.frames) n_obs += f.observations.size();
  std::string out =
      "# Image list with two lines of data per image:\n"
      "#   IMAGE_ID, QW, QX, QY, QZ, TX, TY, TZ, CAMERA_ID, NAME\n"
      "#   POINTS2D[] as (X, Y, POINT3D_ID)\n"
      "# Number of images: " +
      std::to_string(recon.frames.size()) +
      ", total observations: " + std::to_string(n_obs) + "\n";
  for (const auto& [id, f] : recon.frames) {
    out += std::to_string(id);
    for (const double v : {f.pose.q.w, f.pose.q.x, f.pose.q.y, f.pose.q.z,
                           f.pose.t.x(), f.pose.t.y(), f.pose.t.z()}) {
      out += ' ';
      append_double(out, v);
    }
    out += ' ' + std::to_string(f.camera_id) + ' ' + f.name + '\n';
    bool first = true;
    for (const auto& obs : f.observations) {
      if (!first) out += ' ';
      first = false;
      append_double(out, obs.u);
      out += ' ';
      append_double(out, obs.v);
      out += ' ';
      out += obs.tracked() ? std::to_string(obs.point3d_id) : "-1";
    }
    out += '\n';
  }
  return out;
}

inline std::string points_to_text(const SparseReconstruction& recon) {
  std::string out =
      "# 3D point list with one line of data per point:\n"
      "#   POINT3D_ID, X, Y, Z, R, G, B, ERROR, TRACK[] as (IMAGE_ID, "
      "POINT2D_IDX)\n"
      "# Number of points: " +
      std::to_string(recon.points.size()) + "\n";
  for (const auto& [id, pt] : recon.points) {
    out += std::to_string(id);
    for (const double v : {pt.xyz.x(), pt.xyz.y(), pt.xyz.z()}) {
      out += ' ';
      append_double(out, v);
    }
    for (const auto c : pt.color) out += ' ' + std::to_string(c);
    out += ' ';
    append_double(out, pt.error);
    for (const auto& el : pt.track) {
      out += ' ' + std::to_string(el.image_id) + ' ' +
             std::to_string(el.point2d_idx);
    }
    out += '\n';
  }
  return out;
}

inline std::uint64_t offset_or_zero(const auto& map, const auto& key) {
  const auto it = map.find(key);
  return it == map.end() ? 0 : it->second;
}

// Cross-table checks. With `offsets` the errors are positioned at the
// referencing record.
inline void check_references(const SparseReconstruction& recon,
                             const RecordOffsets* offsets) {
  const std::string images_file = offsets ? offsets->images_file : "<memory>";
  const std::string points_file = offsets ? offsets->points_file : "<memory>";
  auto image_offset = [&](std::uint32_t id) -> std::uint64_t {
    return offsets ? offset_or_zero(offsets->images, id) : 0;
  };
  auto point_offset = [&](std::uint64_t id) -> std::uint64_t {
    return offsets ? offset_or_zero(offsets->points, id) : 0;
  };

  for (const auto& [id, f] : recon.frames) {
    if (!recon.cameras.count(f.camera_id)) {
      throw DanglingReferenceError(
          images_file, image_offset(id),
          "frame " + std::to_string(id) + " references missing camera_id",
          {f.camera_id});
    }
    std::vector<std::uint64_t> missing;
    for (const auto& obs : f.observations) {
      if (obs.tracked() && !recon.points.count(obs.point3d_id)) {
        missing.push_back(obs.point3d_id);
      }
    }
    if (!missing.empty()) {
      throw DanglingReferenceError(
          images_file, image_offset(id),
          "frame " + std::to_string(id) + " observes missing point3D_id(s)",
          std::move(missing));
    }
  }
  for (const auto& [id, pt] : recon.points) {
    for (const auto& el : pt.track) {
      const auto it = recon.frames.find(el.image_id);
      if (it == recon.frames.end()) {
        throw DanglingReferenceError(
            points_file, point_offset(id),
            "point " + std::to_string(id) + " track references missing image_id",
            {el.image_id});
      }
      const auto& obs = it->second.observations;
      if (el.point2d_idx >= obs.size() ||
          obs[el.point2d_idx].point3d_id != id) {
        throw DanglingReferenceError(
            points_file, point_offset(id),
            "point " + std::to_string(id) + " track entry (image " +
                std::to_string(el.image_id) +
                ") does not match an observation of that image; point2D_idx",
            {el.point2d_idx});
      }
    }
  }
}

}  // namespace detail

// Full invariant check of an in-memory reconstruction. Throws
// InvariantError or DanglingReferenceError.
inline void validate(const SparseReconstruction& recon) {
  for (const auto& [id, cam] : recon.cameras) {
    if (id != cam.camera_id) throw InvariantError("camera key/id mismatch");
    validate_camera(cam);
  }
  for (const auto& [id, f] : recon.frames) {
    if (id != f.image_id) throw InvariantError("frame key/id mismatch");
    if (std::abs(f.pose.q.norm() - 1.0) > 1e-6) {
      throw InvariantError("frame " + std::to_string(id) +
                           ": quaternion is not unit norm");
    }
    if (f.name.empty() ||
        f.name.find_first_of("\n\r") != std::string::npos ||
        f.name.find('\0') != std::string::npos) {
      throw InvariantError("frame " + std::to_string(id) + ": invalid name");
    }
  }
  for (const auto& [id, pt] : recon.points) {
    if (id != pt.point3d_id) throw InvariantError("point key/id mismatch");
    if (!(pt.error >= 0.0)) {
      throw InvariantError("point " + std::to_string(id) +
                           ": negative reprojection error");
    }
  }
  detail::check_references(recon, nullptr);
}

struct ModelFiles {
  std::filesystem::path cameras, images, points;
};

inline ModelFiles model_files(const std::filesystem::path& dir,
                              ModelFormat format) {
  const char* ext = format == ModelFormat::kText ? ".txt" : ".bin";
  return {dir / (std::string("cameras") + ext),
          dir / (std::string("images") + ext),
          dir / (std::string("points3D") + ext)};
}

// Picks binary when all three .bin files exist, else text when all three
// .txt files exist. Throws naming the missing files otherwise.
inline ModelFormat detect_format(const std::filesystem::path& dir) {
  auto all_exist = [&](ModelFormat f) {
    const auto files = model_files(dir, f);
    return std::filesystem::exists(files.cameras) &&
           std::filesystem::exists(files.images) &&
           std::filesystem::exists(files.points);
  };
  if (all_exist(ModelFormat::kBinary)) return ModelFormat::kBinary;
  if (all_exist(ModelFormat::kText)) return ModelFormat::kText;
  throw Error("missing model files in " + dir.string() +
              ": need cameras/images/points3D as .bin or .txt");
}

inline SparseReconstruction parse_model(const std::filesystem::path& dir,
                                        ModelFormat format = ModelFormat::kAuto,
                                        const WarningSink& warn = {}) {
  if (format == ModelFormat::kAuto) format = detect_format(dir);
  const auto files = model_files(dir, format);
  for (const auto& p : {files.cameras, files.images, files.points}) {
    if (!std::filesystem::exists(p)) throw Error("missing file " + p.string());
  }

  SparseReconstruction recon;
  detail::RecordOffsets offsets;
  offsets.images_file = files.images.string();
  offsets.points_file = files.points.string();

  // Each file is independent until cross-linking, so read them concurrently
  // into separate partial reconstructions.
  SparseReconstruction cams_part, images_part, points_part;
  detail::RecordOffsets images_offsets, points_offsets;
  const bool binary = format == ModelFormat::kBinary;
  auto load_cameras = [&] {
    const auto bytes = detail::slurp(files.cameras);
    if (binary) {
      detail::parse_cameras_binary(files.cameras.string(), bytes, cams_part);
    } else {
      detail::parse_cameras_text(files.cameras.string(),
                                 {bytes.data(), bytes.size()}, cams_part, warn);
    }
  };
  auto load_images = [&] {
    const auto bytes = detail::slurp(files.images);
    if (binary) {
      detail::parse_images_binary(files.images.string(), bytes, images_part,
                                  images_offsets);
    } else {
      detail::parse_images_text(files.images.string(),
                                {bytes.data(), bytes.size()}, images_part,
                                images_offsets);
    }
  };
  auto load_points = [&] {
    const auto bytes = detail::slurp(files.points);
    if (binary) {
      detail::parse_points_binary(files.points.string(), bytes, points_part,
                                  points_offsets);
    } else {
      detail::parse_points_text(files.points.string(),
                                {bytes.data(), bytes.size()}, points_part,
                                points_offsets);
    }
  };
  auto images_job = std::async(std::launch::async, load_images);
  auto points_job = std::async(std::launch::async, load_points);
  // Surface the first error in file order after all jobs have finished.
  std::exception_ptr err;
  try {
    load_cameras();
  } catch (...) {
    err = std::current_exception();
  }
  try {
    images_job.get();
  } catch (...) {
    if (!err) err = std::current_exception();
  }
  try {
    points_job.get();
  } catch (...) {
    if (!err) err = std::current_exception();
  }
  if (err) std::rethrow_exception(err);

  recon.cameras = std::move(cams_part.cameras);
  recon.frames = std::move(images_part.frames);
  recon.points = std::move(points_part.points);
  offsets.images = std::move(images_offsets.images);
  offsets.points = std::move(points_offsets.points);

  detail::check_references(recon, &offsets);
  if (warn && recon.cameras.size() > 1) {
    warn(dir.string() + ": model has " + std::to_string(recon.cameras.size()) +
         " cameras; single-video pipelines expect one");
  }
  return recon;
}

inline void write_model(const SparseReconstruction& recon,
                        const std::filesystem::path& dir,
                        ModelFormat format = ModelFormat::kBinary) {
  validate(recon);
  if (format == ModelFormat::kAuto) format = ModelFormat::kBinary;
  if (format == ModelFormat::kBinary) {
    for (const auto& [id, cam] : recon.cameras) {
      if (cam.model == CameraModel::kUnknown) {
        throw InvariantError("camera " + std::to_string(id) + " has model " +
                             cam.name() + " which has no binary model id");
      }
    }
  }
  for (const auto& [id, f] : recon.frames) {
    if (format == ModelFormat::kText &&
        (f.name.front() == ' ' || f.name.back() == ' ' ||
         f.name.find('\t') != std::string::npos)) {
      throw InvariantError("frame " + std::to_string(id) +
                           ": name cannot be stored in the text format");
    }
  }
  std::filesystem::create_directories(dir);
  const auto files = model_files(dir, format);
  if (format == ModelFormat::kBinary) {
    detail::spit(files.cameras, detail::cameras_to_binary(recon));
    detail::spit(files.images, detail::images_to_binary(recon));
    detail::spit(files.points, detail::points_to_binary(recon));
  } else {
    detail::spit(files.cameras, detail::cameras_to_text(recon));
    detail::spit(files.images, detail::images_to_text(recon));
    detail::spit(files.points, detail::points_to_text(recon));
  }
}

}  // namespace ghost
