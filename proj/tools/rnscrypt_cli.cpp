// rnscrypt: command-line front end.
//
// Exit codes: 0 success, 1 usage or I/O error, 2 health test failure,
// 3 cryptographic precondition failure (bad key, refused export, bad frame).

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <sstream>

#include "rnscrypt/bench.hpp"
#include "rnscrypt/errors.hpp"
#include "rnscrypt/health.hpp"
#include "rnscrypt/prime.hpp"
#include "rnscrypt/rbg.hpp"
#include "rnscrypt/rsa.hpp"

namespace {

using namespace rnscrypt;

constexpr int kExitUsage = 1;
constexpr int kExitHealth = 2;
constexpr int kExitCrypto = 3;

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<std::uint8_t> read_input(const std::string& path) {
  if (path == "-") {
    std::cin >> std::noskipws;
    return {std::istreambuf_iterator<char>(std::cin), std::istreambuf_iterator<char>()};
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string read_text(const std::string& path) {
  const auto bytes = read_input(path);
  return {bytes.begin(), bytes.end()};
}

void write_output(const std::string& path, std::span<const std::uint8_t> data) {
  if (path == "-") {
    std::cout.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
    std::cout.flush();
    if (!std::cout) throw IoError("write to standard output failed");
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
  out.close();
  if (!out) throw IoError("cannot write " + path);
}

void write_text(const std::string& path, const std::string& text) {
  write_output(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

struct SourceChoice {
  std::string spec;
  bool explicit_flag = false;
};

SourceChoice choose_source(const std::string& flag) {
  if (!flag.empty()) return {flag, true};
  return {rbg::default_source_spec(), false};
}

rbg::Drbg make_drbg(const SourceChoice& s, std::string_view label) {
  const std::vector<std::uint8_t> personalization(label.begin(), label.end());
  return rbg::Drbg::instantiate(rbg::make_source(s.spec), personalization);
}

std::vector<std::size_t> parse_block_list(const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    unsigned long long v = 0;
    try {
      v = std::stoull(item, &used);
    } catch (const std::exception&) {
      throw CLI::ValidationError("--blocks", "not a number: " + item);
    }
    if (used != item.size() || v == 0) throw CLI::ValidationError("--blocks", "bad block count: " + item);
    out.push_back(v);
  }
  if (out.empty()) throw CLI::ValidationError("--blocks", "empty list");
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"RNS Montgomery arithmetic, RSA and random bit generation"};
  app.require_subcommand(1, 1);
  app.allow_extras(false);

  // keygen
  auto* keygen = app.add_subcommand("keygen", "Generate an RSA key pair");
  std::size_t kg_bits = 0;
  std::uint64_t kg_exp = rsa::kDefaultExponent;
  std::string kg_source, kg_out;
  bool kg_export = false, kg_yes = false;
  keygen->add_option("--bits", kg_bits, "Modulus size")->required()->check(CLI::IsMember({1024, 2048, 3072}));
  keygen->add_option("--pub-exp", kg_exp, "Public exponent")->capture_default_str();
  keygen->add_option("--source", kg_source, "jitter | os | seed:<hex> | file:<path>");
  keygen->add_option("--out", kg_out, "Public key file; the private key goes to <out>.priv")->required();
  auto* export_flag = keygen->add_flag("--export-private", kg_export, "Also write the private key");
  keygen->add_flag("--yes-really", kg_yes, "Confirm private key export")->needs(export_flag);

  // encrypt / decrypt
  auto* encrypt = app.add_subcommand("encrypt", "Encrypt a file with a public key");
  std::string en_key, en_in, en_out;
  encrypt->add_option("--key", en_key, "Public key file")->required();
  encrypt->add_option("--in", en_in, "Input path or -")->required();
  encrypt->add_option("--out", en_out, "Output path or -")->required();

  auto* decrypt = app.add_subcommand("decrypt", "Decrypt a file with a private key");
  std::string de_key, de_in, de_out;
  decrypt->add_option("--key", de_key, "Private key file")->required();
  decrypt->add_option("--in", de_in, "Input path or -")->required();
  decrypt->add_option("--out", de_out, "Output path or -")->required();

  // rand
  auto* rand = app.add_subcommand("rand", "Write raw generator output");
  std::size_t rd_bytes = 0;
  std::string rd_source, rd_out;
  rand->add_option("--bytes", rd_bytes, "Number of bytes")->required();
  rand->add_option("--source", rd_source, "jitter | os | seed:<hex> | file:<path>");
  rand->add_option("--out", rd_out, "Output path or -")->required();

  // prime
  auto* prime_cmd = app.add_subcommand("prime", "Generate a probable prime");
  std::size_t pr_bits = 0;
  unsigned pr_rounds = prime::kDefaultRounds;
  std::string pr_source;
  prime_cmd->add_option("--bits", pr_bits, "Bit length")->required()->check(CLI::Range(16, 8192));
  prime_cmd->add_option("--rounds", pr_rounds, "Miller-Rabin rounds")->capture_default_str()->check(CLI::Range(1, 1000));
  prime_cmd->add_option("--source", pr_source, "jitter | os | seed:<hex> | file:<path>");

  // health
  auto* health = app.add_subcommand("health", "Run the health tests over 20,000-bit blocks");
  std::string he_in;
  health->add_option("--in", he_in, "Input path or -")->required();

  // bench
  auto* bench_cmd = app.add_subcommand("bench", "Throughput benchmark, CSV on stdout");
  std::string be_op, be_blocks;
  std::size_t be_bits = 0;
  unsigned be_repeat = 3, be_workers = exec::hardware_workers();
  bench_cmd->add_option("--op", be_op, "modmul | modexp | keygen | rand")
      ->required()
      ->check(CLI::IsMember({"modmul", "modexp", "keygen", "rand"}));
  bench_cmd->add_option("--bits", be_bits, "Operand size")->required()->check(CLI::Range(16, 3968));
  bench_cmd->add_option("--blocks", be_blocks, "Comma-separated block counts")->required();
  bench_cmd->add_option("--repeat", be_repeat, "Timed runs per point")->capture_default_str()->check(CLI::Range(1, 1000));
  bench_cmd->add_option("--workers", be_workers, "Worker threads")->capture_default_str()->check(CLI::Range(1, 1024));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*keygen) {
      if (kg_export && !kg_yes) {
        std::cerr << "error: --export-private needs --yes-really\n";
        return kExitCrypto;
      }
      const SourceChoice src = choose_source(kg_source);
      rbg::Drbg rng = make_drbg(src, "rnscrypt keygen");
      rsa::KeygenOptions opts;
      opts.e = kg_exp;
      opts.allow_fixed_source = src.explicit_flag;
      rsa::RsaKeyPair key = rsa::keygen(kg_bits, rng, opts);
      write_text(kg_out, rsa::export_public(key.public_key()) + "\n");
      if (kg_export) {
        const std::string priv_path = kg_out + ".priv";
        write_text(priv_path, rsa::export_private(key, kg_yes) + "\n");
        std::filesystem::permissions(priv_path, std::filesystem::perms::owner_read |
                                                    std::filesystem::perms::owner_write);
      }
      return 0;
    }
    if (*encrypt) {
      const rsa::PublicKey key = rsa::parse_public(read_text(en_key));
      const auto blocks = rsa::encrypt(read_input(en_in), key);
      write_output(en_out, rsa::encode_ciphertext(blocks, key.key_bytes()));
      return 0;
    }
    if (*decrypt) {
      const rsa::RsaKeyPair key = rsa::parse_private(read_text(de_key));
      const auto blocks = rsa::decode_ciphertext(read_input(de_in), key.public_key().key_bytes());
      write_output(de_out, rsa::decrypt(blocks, key));
      return 0;
    }
    if (*rand) {
      rbg::Drbg rng = make_drbg(choose_source(rd_source), "rnscrypt rand");
      if (rd_out == "-") {
        rbg::export_stream(rng, rd_bytes, std::cout);
      } else {
        std::ofstream out(rd_out, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write " + rd_out);
        rbg::export_stream(rng, rd_bytes, out);
      }
      return 0;
    }
    if (*prime_cmd) {
      rbg::Drbg rng = make_drbg(choose_source(pr_source), "rnscrypt prime");
      std::cout << prime::generate_prime(pr_bits, rng, {pr_rounds, 0}).to_hex() << "\n";
      return 0;
    }
    if (*health) {
      const auto data = read_input(he_in);
      if (data.empty() || data.size() % rbg::kHealthBlockBytes != 0) {
        std::cerr << "error: input must be a whole number of " << rbg::kHealthBlockBytes
                  << "-byte blocks, got " << data.size() << " bytes\n";
        return kExitUsage;
      }
      bool all = true;
      for (std::size_t i = 0; i * rbg::kHealthBlockBytes < data.size(); ++i) {
        const auto report = rbg::health_check(
            std::span(data).subspan(i * rbg::kHealthBlockBytes, rbg::kHealthBlockBytes));
        std::cout << "block=" << i << "\n" << rbg::format_report(report);
        all = all && report.all_pass();
      }
      return all ? 0 : kExitHealth;
    }
    if (*bench_cmd) {
      bench::BenchConfig c;
      c.op = bench::parse_op(be_op);
      c.bits = be_bits;
      c.block_counts = parse_block_list(be_blocks);
      c.repeat = be_repeat;
      c.workers = be_workers;
      std::cout << bench::kCsvHeader << "\n";
      for (const auto& r : bench::run(c)) std::cout << bench::to_csv(r) << "\n";
      return 0;
    }
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const SinkWriteError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const RangeError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitCrypto;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
