#include "json_io.hpp"

#include <cmath>

namespace dscms::detail {

Result<Json> parse_document(std::string_view text, std::string_view what) {
    try {
        return Json::parse(text.begin(), text.end());
    } catch (const Json::exception& e) {
        return Error::make("bad-document", std::string(what) + ": " + e.what());
    }
}

bool FieldReader::has(std::string_view key) const {
    return record_.is_object() && record_.contains(std::string(key)) && !record_.at(std::string(key)).is_null();
}

void FieldReader::fail(std::string code, std::string message) {
    errors_.push_back(Error::make(std::move(code), std::move(message), location_));
}

const Json* FieldReader::lookup(std::string_view key, bool required) {
    if (!record_.is_object()) {
        fail("bad-record", "expected an object");
        return nullptr;
    }
    const auto it = record_.find(std::string(key));
    if (it == record_.end() || it->is_null()) {
        if (required) {
            fail("missing-field", "missing field '" + std::string(key) + "'");
        }
        return nullptr;
    }
    return &*it;
}

std::optional<std::string> FieldReader::string(std::string_view key, bool required) {
    const Json* v = lookup(key, required);
    if (v == nullptr) {
        return std::nullopt;
    }
    if (!v->is_string()) {
        fail("bad-field", "field '" + std::string(key) + "' must be a string");
        return std::nullopt;
    }
    return v->get<std::string>();
}

std::optional<double> FieldReader::number(std::string_view key, bool required) {
    const Json* v = lookup(key, required);
    if (v == nullptr) {
        return std::nullopt;
    }
    if (!v->is_number()) {
        fail("bad-field", "field '" + std::string(key) + "' must be a number");
        return std::nullopt;
    }
    const double d = v->get<double>();
    if (!std::isfinite(d)) {
        fail("non-finite-value", "field '" + std::string(key) + "' is not finite");
        return std::nullopt;
    }
    return d;
}

std::optional<long> FieldReader::integer(std::string_view key, bool required) {
    const Json* v = lookup(key, required);
    if (v == nullptr) {
        return std::nullopt;
    }
    if (!v->is_number_integer()) {
        fail("bad-field", "field '" + std::string(key) + "' must be an integer");
        return std::nullopt;
    }
    return v->get<long>();
}

std::optional<std::vector<std::string>> FieldReader::string_list(std::string_view key, bool required) {
    const Json* v = lookup(key, required);
    if (v == nullptr) {
        return required ? std::nullopt : std::optional<std::vector<std::string>>{std::vector<std::string>{}};
    }
    if (!v->is_array()) {
        fail("bad-field", "field '" + std::string(key) + "' must be a list");
        return std::nullopt;
    }
    std::vector<std::string> out;
    for (const auto& item : *v) {
        if (!item.is_string()) {
            fail("bad-field", "field '" + std::string(key) + "' must contain strings");
            return std::nullopt;
        }
        out.push_back(item.get<std::string>());
    }
    return out;
}

std::string scalar_text(const Json& value) {
    if (value.is_string()) {
        return value.get<std::string>();
    }
    return value.dump();
}

}  // namespace dscms::detail
