#pragma once

// Defect registry JSON: strict parsing (unknown keys are errors) and
// serialization.

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>

#include <json.hpp>

#include "pdmr/species.hpp"

namespace pdmr {

class SchemaError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The bundled registry document.
std::string_view default_registry_json();

Registry parse_registry(const nlohmann::json& doc);
Registry parse_registry(std::string_view text);
Registry load_registry_file(const std::filesystem::path& path);
Registry load_default_registry();

nlohmann::json registry_to_json(const Registry& registry);

/// Per-species provenance flags plus the list of assumed quantities.
nlohmann::json provenance_report(const Registry& registry);

/// Throws SchemaError naming `where` if `obj` has a key outside `allowed`.
void require_known_keys(const nlohmann::json& obj, std::initializer_list<const char*> allowed,
                        const std::string& where);

}  // namespace pdmr
