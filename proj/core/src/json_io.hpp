// Small helpers for pulling typed fields out of JSON records with located errors.
#pragma once

#include "dscms/json.hpp"
#include "dscms/result.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace dscms::detail {

/// Parses text into a document, reporting syntax errors as `bad-document`.
[[nodiscard]] Result<Json> parse_document(std::string_view text, std::string_view what);

class FieldReader {
public:
    FieldReader(const Json& record, std::string location) : record_(record), location_(std::move(location)) {}

    [[nodiscard]] std::optional<std::string> string(std::string_view key, bool required = true);
    [[nodiscard]] std::optional<double> number(std::string_view key, bool required = true);
    [[nodiscard]] std::optional<long> integer(std::string_view key, bool required = true);
    [[nodiscard]] std::optional<std::vector<std::string>> string_list(std::string_view key, bool required = true);

    [[nodiscard]] bool has(std::string_view key) const;
    void fail(std::string code, std::string message);

    [[nodiscard]] const std::vector<Error>& errors() const { return errors_; }
    [[nodiscard]] std::vector<Error> take_errors() { return std::move(errors_); }
    [[nodiscard]] const std::string& location() const { return location_; }

private:
    const Json* lookup(std::string_view key, bool required);

    const Json& record_;
    std::string location_;
    std::vector<Error> errors_;
};

/// Renders a JSON scalar as plain text (strings unquoted).
[[nodiscard]] std::string scalar_text(const Json& value);

}  // namespace dscms::detail
