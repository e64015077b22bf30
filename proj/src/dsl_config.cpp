#include <string>

#include "alphagp/expr.hpp"
#include "json.hpp"

namespace alphagp {

Dsl LoadDslFromJson(const std::string& json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed registry JSON: ") + e.what());
  }
  if (!doc.is_object()) {
    throw InputError("registry JSON must be an object");
  }

  Dsl stock = MakeDefaultDsl();
  Dsl dsl;
  try {
    dsl.window_min = doc.value("window_min", stock.window_min);
    dsl.window_max = doc.value("window_max", stock.window_max);
    dsl.max_depth = doc.value("max_depth", stock.max_depth);
    if (doc.contains("fields")) {
      dsl.fields = doc.at("fields").get<std::vector<std::string>>();
    } else {
      dsl.fields = stock.fields;
    }
    if (doc.contains("operators")) {
      for (const auto& entry : doc.at("operators")) {
        std::string name = entry.at("name").get<std::string>();
        std::string semantics = entry.value("semantics", name);
        std::optional<int> builtin = stock.ops.Find(semantics);
        if (!builtin) {
          throw InputError("unknown operator semantics: " + semantics);
        }
        OperatorSpec spec = stock.ops.At(*builtin);
        spec.name = std::move(name);
        dsl.ops.Add(std::move(spec));
      }
    } else {
      for (int i = 0; i < stock.ops.size(); ++i) {
        dsl.ops.Add(stock.ops.At(i));
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed registry JSON: ") + e.what());
  }

  if (dsl.fields.empty()) {
    throw InputError("registry must define at least one field");
  }
  if (dsl.ops.size() == 0) {
    throw InputError("registry must define at least one operator");
  }
  if (dsl.window_min < 2 || dsl.window_min > dsl.window_max) {
    throw InputError("registry window bounds must satisfy 2 <= min <= max");
  }
  if (dsl.max_depth < 1) {
    throw InputError("registry max_depth must be at least 1");
  }
  return dsl;
}

}  // namespace alphagp
