#include "homog/cache.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace homog {

namespace {

std::string fmt(double v) {
  char buf[32];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

bool read_tag(std::istream& in, const std::string& expected) {
  std::string tag;
  in >> tag;
  return static_cast<bool>(in) && tag == expected;
}

void write_tensor(std::ostream& os, const char* tag, const HomogenizedTensor& t) {
  os << tag << ' ' << fmt(t.a[0][0]) << ' ' << fmt(t.a[0][1]) << ' ' << fmt(t.a[1][0]) << ' '
     << fmt(t.a[1][1]) << '\n';
}

bool read_tensor(std::istream& in, const std::string& tag, HomogenizedTensor& t) {
  if (!read_tag(in, tag)) return false;
  in >> t.a[0][0] >> t.a[0][1] >> t.a[1][0] >> t.a[1][1];
  return static_cast<bool>(in);
}

}  // namespace

std::uint64_t fnv1a_hash(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string CacheKey::hex() const {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

CacheKey cell_cache_key(const RunConfig& config) {
  std::string s = "cell-stage";
  char buf[32];
  auto put = [&](double x) {
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, x);
    s.append(" ").append(buf, p);
  };
  for (const auto& h : config.holes) {
    put(h.center.x);
    put(h.center.y);
    put(h.radius);
    s += " p" + std::to_string(h.phase);
  }
  s += " seg " + std::to_string(config.segments);
  s += " h";
  put(config.cell_target_h);
  s += " coeff " + config.coeff_name;
  for (double v : config.coeff_params) put(v);
  s += " cg";
  put(config.cg_tol);
  return CacheKey{fnv1a_hash(s)};
}

std::optional<CellCacheData> load_cell_cache(const std::string& dir, const CacheKey& key,
                                             std::size_t expected_vertices) {
  if (dir.empty()) return std::nullopt;
  const std::filesystem::path path = std::filesystem::path(dir) / ("cell-" + key.hex() + ".txt");
  std::ifstream in(path);
  if (!in) return std::nullopt;

  CellCacheData data;
  if (!read_tag(in, "homog-cell-cache") || !read_tag(in, "1")) return std::nullopt;
  if (!read_tag(in, "measures")) return std::nullopt;
  in >> data.measures.area >> data.measures.perimeter_s1 >> data.measures.perimeter_s2 >>
      data.measures.q1 >> data.measures.q2;
  if (!in) return std::nullopt;
  if (!read_tensor(in, "tensor-flux", data.tensor.flux_average)) return std::nullopt;
  if (!read_tensor(in, "tensor-energy", data.tensor.energy_form)) return std::nullopt;
  if (!read_tag(in, "form-disagreement")) return std::nullopt;
  in >> data.tensor.max_form_disagreement;

  auto read_field = [&](const std::string& tag, std::vector<double>& out) {
    if (!read_tag(in, tag)) return false;
    std::size_t n = 0;
    in >> n;
    if (!in || n != expected_vertices) return false;
    out.resize(n);
    for (std::size_t i = 0; i < n; ++i) in >> out[i];
    return static_cast<bool>(in);
  };
  if (!read_field("field-t1", data.corrector[0])) return std::nullopt;
  if (!read_field("field-t2", data.corrector[1])) return std::nullopt;
  if (!read_field("field-psi1", data.auxiliary[0])) return std::nullopt;
  if (!read_field("field-psi2", data.auxiliary[1])) return std::nullopt;
  return data;
}

void store_cell_cache(const std::string& dir, const CacheKey& key, const CellSolution& cell,
                      const TensorPair& tensor) {
  if (dir.empty()) return;
  std::filesystem::create_directories(dir);
  const std::filesystem::path path = std::filesystem::path(dir) / ("cell-" + key.hex() + ".txt");
  std::ofstream os(path);
  os << "homog-cell-cache 1\n";
  os << "measures " << fmt(cell.measures.area) << ' ' << fmt(cell.measures.perimeter_s1) << ' '
     << fmt(cell.measures.perimeter_s2) << ' ' << fmt(cell.measures.q1) << ' '
     << fmt(cell.measures.q2) << '\n';
  write_tensor(os, "tensor-flux", tensor.flux_average);
  write_tensor(os, "tensor-energy", tensor.energy_form);
  os << "form-disagreement " << fmt(tensor.max_form_disagreement) << '\n';
  auto write_values = [&](const char* tag, const std::vector<double>& values) {
    os << tag << ' ' << values.size() << '\n';
    for (double v : values) os << fmt(v) << '\n';
  };
  write_values("field-t1", cell.corrector[0].values);
  write_values("field-t2", cell.corrector[1].values);
  write_values("field-psi1", cell.auxiliary[0].values);
  write_values("field-psi2", cell.auxiliary[1].values);
}

}  // namespace homog
