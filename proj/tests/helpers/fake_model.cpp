// Stand-in external predictor speaking the line-delimited protocol.
// Modes: sigmoid (score = 1/(1+exp(-a)), null -> 0.5), short (drops one score),
// range (answers 1.5), quit (exits without answering).

#include <cmath>
#include <iostream>
#include <string>

#include <json.hpp>

int main(int argc, char** argv) {
  const std::string mode = argc > 1 ? argv[1] : "sigmoid";
  std::string line;
  while (std::getline(std::cin, line)) {
    if (mode == "quit") return 0;
    const auto req = nlohmann::json::parse(line);
    nlohmann::json scores = nlohmann::json::array();
    for (const auto& row : req.at("rows")) {
      if (mode == "range") {
        scores.push_back(1.5);
        continue;
      }
      const auto& a = row.at("a");
      scores.push_back(a.is_null() ? 0.5 : 1.0 / (1.0 + std::exp(-a.get<double>())));
    }
    if (mode == "short" && !scores.empty()) scores.erase(scores.size() - 1);
    std::cout << nlohmann::json{{"scores", scores}}.dump() << "\n" << std::flush;
  }
  return 0;
}
