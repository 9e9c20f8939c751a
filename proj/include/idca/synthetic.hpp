#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "idca/csv.hpp"
#include "idca/dataset.hpp"
#include "idca/rng.hpp"

// Synthetic inputs: UNSW-NB15-shaped flow records and labeled Gaussian
// clusters for quick experiments.

namespace idca {

namespace detail {
inline double normal01(Rng& rng) {
  // Box-Muller; u1 kept away from 0.
  const double u1 = 1.0 - rng.uniform01();
  const double u2 = rng.uniform01();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
}

inline std::string integer_text(double v) { return std::to_string(static_cast<long long>(std::llround(v))); }
}  // namespace detail

/// Records in the 49-column UNSW-NB15 layout. Attacks differ from normal
/// traffic mostly in TTLs, window sizes, byte counts and connection
/// counters, with enough noise that no single column separates them.
inline std::vector<FlowRecord> synth_unsw_records(std::size_t n, double attack_fraction, std::uint64_t seed) {
  static const std::array<const char*, 9> categories{"Analysis", "Backdoor", "DoS",      "Exploits", "Fuzzers",
                                                     "Generic",  "Reconnaissance", "Shellcode", "Worms"};
  struct Service {
    const char* proto;
    const char* name;
    int port;
  };
  static const std::array<Service, 6> services{{{"tcp", "http", 80},
                                                {"tcp", "ftp", 21},
                                                {"tcp", "smtp", 25},
                                                {"tcp", "-", 0},
                                                {"udp", "dns", 53},
                                                {"udp", "-", 0}}};
  const Schema schema = Schema::unsw_nb15();
  Rng rng(seed);
  const auto n_attack = static_cast<std::size_t>(std::llround(attack_fraction * static_cast<double>(n)));
  std::vector<int> labels(n, 0);
  std::fill(labels.begin(), labels.begin() + static_cast<std::ptrdiff_t>(std::min(n_attack, n)), 1);
  rng.shuffle(labels);

  std::vector<FlowRecord> out;
  out.reserve(n);
  long long clock = 1421927414;
  for (std::size_t i = 0; i < n; ++i) {
    const bool attack = labels[i] == 1;
    // Attacks are noisy: about one in six looks like normal traffic.
    const bool loud = attack && rng.uniform01() < 0.85;
    const Service& svc = services[attack ? rng.index(services.size()) : rng.index(5)];
    const bool tcp = std::string(svc.proto) == "tcp";
    auto jitter = [&](double mean, double rel) { return std::max(0.0, mean * (1.0 + rel * detail::normal01(rng))); };

    const double spkts = std::round(loud ? jitter(8, 0.6) + 1 : jitter(40, 0.5) + 2);
    const double dpkts = std::round(loud ? jitter(2, 0.8) : jitter(38, 0.5) + 1);
    const double sbytes = std::round(spkts * (loud ? jitter(120, 0.5) + 40 : jitter(90, 0.3) + 40));
    const double dbytes = std::round(dpkts * (loud ? jitter(60, 0.6) : jitter(900, 0.4) + 40));
    const double dur = loud ? jitter(0.4, 1.0) : jitter(1.8, 0.8);
    const double sttl = loud ? 254 : (rng.uniform01() < 0.9 ? 31 : 62);
    const double dttl = loud ? (rng.uniform01() < 0.7 ? 252 : 0) : 29;
    clock += static_cast<long long>(rng.index(3));
    const double span = std::ceil(dur);

    std::vector<std::string> f(schema.size());
    auto set = [&](const char* name, std::string v) { f[*schema.index_of(name)] = std::move(v); };
    auto seti = [&](const char* name, double v) { set(name, detail::integer_text(v)); };
    auto setr = [&](const char* name, double v) { set(name, csv::format(std::round(v * 1e6) / 1e6)); };

    set("srcip", (attack ? "175.45.176." : "59.166.0.") + std::to_string(rng.index(4)));
    seti("sport", static_cast<double>(1024 + rng.index(64000)));
    set("dstip", "149.171.126." + std::to_string(10 + rng.index(10)));
    seti("dsport", svc.port ? svc.port : static_cast<double>(1 + rng.index(65000)));
    set("proto", svc.proto);
    set("state", tcp ? (loud ? (rng.uniform01() < 0.6 ? "INT" : "FIN") : "FIN") : (loud ? "INT" : "CON"));
    setr("dur", dur);
    seti("sbytes", sbytes);
    seti("dbytes", dbytes);
    seti("sttl", sttl);
    seti("dttl", dttl);
    seti("sloss", loud ? static_cast<double>(rng.index(2)) : std::round(spkts * 0.02 * rng.uniform01()));
    seti("dloss", loud ? 0 : std::round(dpkts * 0.02 * rng.uniform01()));
    set("service", svc.name);
    const double d = std::max(dur, 1e-3);
    setr("sload", sbytes * 8 / d);
    setr("dload", dbytes * 8 / d);
    seti("spkts", spkts);
    seti("dpkts", dpkts);
    seti("swin", tcp && !loud ? 255 : 0);
    seti("dwin", tcp && !loud ? 255 : 0);
    seti("stcpb", tcp && !loud ? static_cast<double>(rng.index(4000000000u)) : 0);
    seti("dtcpb", tcp && !loud ? static_cast<double>(rng.index(4000000000u)) : 0);
    seti("smeansz", sbytes / spkts);
    seti("dmeansz", dpkts > 0 ? dbytes / dpkts : 0);
    seti("trans_depth", std::string(svc.name) == "http" ? 1 : 0);
    seti("res_bdy_len", std::string(svc.name) == "http" && !loud ? jitter(3000, 0.5) : 0);
    setr("sjit", loud ? jitter(5, 1.0) : jitter(40, 0.6));
    setr("djit", loud ? jitter(2, 1.0) : jitter(30, 0.6));
    seti("stime", static_cast<double>(clock));
    seti("ltime", static_cast<double>(clock) + span);
    setr("sintpkt", loud ? jitter(30, 1.0) : jitter(45, 0.5));
    setr("dintpkt", loud ? jitter(5, 1.0) : jitter(45, 0.5));
    setr("tcprtt", tcp && !loud ? jitter(0.06, 0.5) : 0);
    setr("synack", tcp && !loud ? jitter(0.03, 0.5) : 0);
    setr("ackdat", tcp && !loud ? jitter(0.03, 0.5) : 0);
    seti("is_sm_ips_ports", 0);
    seti("ct_state_ttl", loud ? (dttl > 0 ? 1 : 2) : 0);
    seti("ct_flw_http_mthd", std::string(svc.name) == "http" ? 1 : 0);
    seti("is_ftp_login", std::string(svc.name) == "ftp" && !loud ? 1 : 0);
    seti("ct_ftp_cmd", std::string(svc.name) == "ftp" && !loud ? 1 : 0);
    seti("ct_srv_src", loud ? jitter(20, 0.5) + 1 : jitter(5, 0.6) + 1);
    seti("ct_srv_dst", loud ? jitter(20, 0.5) + 1 : jitter(5, 0.6) + 1);
    seti("ct_dst_ltm", loud ? jitter(12, 0.5) + 1 : jitter(3, 0.6) + 1);
    seti("ct_src_ltm", loud ? jitter(12, 0.5) + 1 : jitter(3, 0.6) + 1);
    seti("ct_src_dport_ltm", loud ? jitter(10, 0.5) + 1 : 1);
    seti("ct_dst_sport_ltm", loud ? jitter(8, 0.5) + 1 : 1);
    seti("ct_dst_src_ltm", loud ? jitter(14, 0.5) + 1 : jitter(3, 0.6) + 1);
    set("attack_cat", attack ? categories[rng.index(categories.size())] : "");
    seti("label", attack ? 1 : 0);

    FlowRecord rec;
    rec.line = i + 2;
    rec.values.assign(schema.size(), std::numeric_limits<double>::quiet_NaN());
    for (std::size_t c = 0; c < schema.size(); ++c) {
      if (schema[c].type != ColumnType::text) rec.values[c] = *csv::parse_double(f[c]);
    }
    rec.attack_cat = f[*schema.attack_cat_index()];
    rec.label = attack ? 1 : 0;
    rec.fields = std::move(f);
    out.push_back(std::move(rec));
  }
  return out;
}

struct ClusterSpec {
  std::size_t dims = 10;
  double attack_fraction = 0.2;
  double normal_center = 0.3;
  double attack_center = 0.7;
  double spread = 0.08;
  std::size_t tissues = 4;  // keys drawn from tcp/udp x http/dns
};

/// Labeled antigens from two Gaussian clusters, clamped to [0,1].
inline std::vector<Antigen> synth_cluster_antigens(std::size_t n, const ClusterSpec& spec, std::uint64_t seed,
                                                   std::size_t first_id = 0) {
  static const std::array<TissueKey, 4> keys{{{"tcp", "http"}, {"tcp", "dns"}, {"udp", "http"}, {"udp", "dns"}}};
  Rng rng(seed);
  std::vector<Antigen> out;
  out.reserve(n);
  const std::size_t tissues = std::clamp<std::size_t>(spec.tissues, 1, keys.size());
  for (std::size_t i = 0; i < n; ++i) {
    Antigen ag;
    ag.id = first_id + i;
    const bool attack = rng.uniform01() < spec.attack_fraction;
    ag.true_label = attack ? 1 : 0;
    ag.attack_cat = attack ? "Generic" : "";
    ag.tissue = keys[rng.index(tissues)];
    const double center = attack ? spec.attack_center : spec.normal_center;
    for (std::size_t d = 0; d < spec.dims; ++d) {
      ag.features.push_back(std::clamp(center + spec.spread * detail::normal01(rng), 0.0, 1.0));
    }
    out.push_back(std::move(ag));
  }
  return out;
}

}  // namespace idca
