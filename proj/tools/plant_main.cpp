// Stand-alone plant speaking the trial protocol on stdin/stdout:
//   in:  "TRIAL <n>" followed by n samples, one per line
//   out: n samples, one per line
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "ilcshape/lti.hpp"
#include "ilcshape/persistence.hpp"

int main(int argc, char** argv) {
  CLI::App cli{"Simulated plant for the external trial protocol"};
  std::string tf_text;
  std::string tf_file;
  auto* inline_opt = cli.add_option("--tf", tf_text, R"(Transfer function JSON, e.g. {"num":[1],"den":[1,0]})");
  cli.add_option("--tf-file", tf_file, "File holding the transfer function JSON")->excludes(inline_opt);
  CLI11_PARSE(cli, argc, argv);

  ilcshape::RationalTf tf;
  try {
    if (!tf_file.empty()) {
      std::ifstream in(tf_file);
      if (!in) throw std::runtime_error("cannot read " + tf_file);
      tf = ilcshape::tf_from_json(nlohmann::json::parse(in));
    } else if (!tf_text.empty()) {
      tf = ilcshape::tf_from_json(nlohmann::json::parse(tf_text));
    } else {
      throw std::runtime_error("give --tf or --tf-file");
    }
    if (!tf.is_proper()) throw std::runtime_error("plant must be proper");
  } catch (const std::exception& e) {
    std::cerr << "ilcshape-plant: " << e.what() << "\n";
    return 2;
  }

  std::ios::sync_with_stdio(false);
  std::string line;
  while (std::getline(std::cin, line)) {
    if (line.empty()) continue;
    std::istringstream head(line);
    std::string word;
    long long n = -1;
    if (!(head >> word >> n) || word != "TRIAL" || n < 0) {
      std::cerr << "ilcshape-plant: bad request '" << line << "'\n";
      return 3;
    }
    std::vector<double> u(static_cast<std::size_t>(n));
    for (auto& v : u) {
      if (!std::getline(std::cin, line)) {
        std::cerr << "ilcshape-plant: truncated trial\n";
        return 3;
      }
      v = std::stod(line);
    }
    const auto y = ilcshape::simulate(tf, ilcshape::Sequence(std::move(u), 0, tf.sample_rate_hz()));
    std::string out;
    out.reserve(y.size() * 24);
    for (double v : y.samples()) out += fmt::format("{:.17g}\n", v);
    std::cout << out << std::flush;
  }
  return 0;
}
