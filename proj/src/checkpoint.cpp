#include <bit>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "sqlfunc/gmn.hpp"

namespace sqlfunc {

using nlohmann::json;

namespace {

constexpr char kMagic[8] = {'F', 'E', 'G', 'M', 'N', '0', '0', '1'};
constexpr std::size_t kHeaderAlign = 4096;

json config_to_json(const ModelConfig& c) {
  json j;
  j["d_h"] = c.d_h;
  j["d_e"] = c.d_e;
  j["K"] = c.K;
  j["T"] = c.T;
  j["gamma"] = c.gamma;
  j["seed"] = c.seed;
  j["content_channels"] = c.content_channels;
  j["content_blocks_per_stage"] = c.content_blocks_per_stage;
  j["content_kernel"] = c.content_kernel;
  j["pe_mode"] = c.pe_mode == PeMode::Global ? "global" : "separate";
  json flows = json::array();
  if (c.flows.logic) flows.push_back("logic");
  if (c.flows.data) flows.push_back("data");
  j["flows"] = flows;
  return j;
}

ModelConfig config_from_json(const json& j) {
  ModelConfig c;
  c.d_h = j.at("d_h").get<int>();
  c.d_e = j.at("d_e").get<int>();
  c.K = j.at("K").get<int>();
  c.T = j.at("T").get<int>();
  c.gamma = j.at("gamma").get<double>();
  c.seed = j.at("seed").get<std::uint64_t>();
  for (std::size_t i = 0; i < 4; ++i)
    c.content_channels[i] = j.at("content_channels")[i].get<int>();
  c.content_blocks_per_stage = j.at("content_blocks_per_stage").get<int>();
  c.content_kernel = j.at("content_kernel").get<int>();
  c.pe_mode = j.at("pe_mode").get<std::string>() == "global"
                  ? PeMode::Global
                  : PeMode::Separate;
  c.flows.logic = false;
  c.flows.data = false;
  for (const auto& f : j.at("flows")) {
    if (f.get<std::string>() == "logic") c.flows.logic = true;
    if (f.get<std::string>() == "data") c.flows.data = true;
  }
  return c;
}

void put_f32_le(std::string& out, float v) {
  std::uint32_t bits;
  std::memcpy(&bits, &v, sizeof(bits));
  out.push_back(static_cast<char>(bits & 0xff));
  out.push_back(static_cast<char>((bits >> 8) & 0xff));
  out.push_back(static_cast<char>((bits >> 16) & 0xff));
  out.push_back(static_cast<char>((bits >> 24) & 0xff));
}

float get_f32_le(const unsigned char* p) {
  std::uint32_t bits = static_cast<std::uint32_t>(p[0]) |
                       (static_cast<std::uint32_t>(p[1]) << 8) |
                       (static_cast<std::uint32_t>(p[2]) << 16) |
                       (static_cast<std::uint32_t>(p[3]) << 24);
  float v;
  std::memcpy(&v, &bits, sizeof(v));
  return v;
}

}  // namespace

void save_checkpoint(const GmnParams& params, const std::string& path) {
  json dir = json::array();
  std::string payload;
  for (const auto& [name, mat] : params.tensors) {
    dir.push_back({{"name", name},
                   {"shape", {mat.rows, mat.cols}},
                   {"offset", payload.size()}});
    for (double v : mat.d) put_f32_le(payload, static_cast<float>(v));
  }
  json header;
  header["config"] = config_to_json(params.config);
  header["tensors"] = std::move(dir);
  std::string head = header.dump();
  // pad the header region (magic + JSON) to the 4 KiB boundary
  std::size_t total = sizeof(kMagic) + head.size();
  std::size_t padded = ((total + kHeaderAlign - 1) / kHeaderAlign) * kHeaderAlign;
  head.append(padded - total, ' ');

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write checkpoint: " + path);
  out.write(kMagic, sizeof(kMagic));
  out.write(head.data(), static_cast<std::streamsize>(head.size()));
  out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
  if (!out) throw Error("checkpoint write failed: " + path);
}

GmnParams load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read checkpoint: " + path);
  std::string data((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  if (data.size() < sizeof(kMagic) ||
      std::memcmp(data.data(), kMagic, sizeof(kMagic)) != 0)
    throw FormatError(0, "bad checkpoint magic");
  // the header region (magic + JSON + space padding) ends on a 4 KiB
  // boundary; probe each boundary until the JSON parses
  std::size_t header_end = 0;
  json header;
  for (std::size_t end = kHeaderAlign; end <= data.size(); end += kHeaderAlign) {
    std::string candidate = data.substr(sizeof(kMagic), end - sizeof(kMagic));
    while (!candidate.empty() && candidate.back() == ' ') candidate.pop_back();
    try {
      header = json::parse(candidate);
      header_end = end;
      break;
    } catch (const json::exception&) {
      if (end + kHeaderAlign > data.size())
        throw FormatError(0, "unparseable checkpoint header");
    }
  }
  if (header_end == 0) throw FormatError(0, "unparseable checkpoint header");
  GmnParams params;
  params.config = config_from_json(header.at("config"));
  const unsigned char* payload =
      reinterpret_cast<const unsigned char*>(data.data()) + header_end;
  const std::size_t payload_size = data.size() - header_end;
  for (const auto& jt : header.at("tensors")) {
    const std::string name = jt.at("name").get<std::string>();
    const int rows = jt.at("shape")[0].get<int>();
    const int cols = jt.at("shape")[1].get<int>();
    const std::size_t offset = jt.at("offset").get<std::size_t>();
    Mat m(rows, cols);
    const std::size_t bytes = m.size() * 4;
    if (offset + bytes > payload_size)
      throw FormatError(0, "checkpoint payload truncated for " + name);
    for (std::size_t i = 0; i < m.size(); ++i)
      m.d[i] = static_cast<double>(get_f32_le(payload + offset + i * 4));
    params.tensors.emplace(name, std::move(m));
  }
  return params;
}

}  // namespace sqlfunc
