#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "otadpd/dpd_model.hpp"
#include "otadpd/pa_model.hpp"
#include "otadpd/receiver.hpp"

namespace otadpd {

using Json = nlohmann::ordered_json;

// Complex values are [re, im] pairs; infinite magnitudes are written as null.
Json pa_to_json(const PaModel& pa);
PaModel pa_from_json(const Json& j);

Json dpd_to_json(const DpdModel& m);
DpdModel dpd_from_json(const Json& j);

Json demapper_to_json(const Demapper& d);
Demapper demapper_from_json(const Json& j);

Json read_json_file(const std::filesystem::path& p);
void write_json_file(const std::filesystem::path& p, const Json& j);
void write_text_file(const std::filesystem::path& p, const std::string& text);

}  // namespace otadpd
