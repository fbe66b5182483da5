#pragma once

// Markdown rendering of experiment and benchmark documents. Every number in the Markdown is
// copied verbatim from the JSON document.

#include <string>

#include <json.hpp>

namespace ea {

enum class ReportFormat { json, markdown };
ReportFormat parse_report_format(std::string_view s);

/// Dispatches on the document's "experiment" key (exp1..exp4, bench, counterfactual, quality).
std::string to_markdown(const nlohmann::json& document);

/// JSON documents are dumped with two-space indentation and a trailing newline.
std::string emit_report(const nlohmann::json& document, ReportFormat format);

}  // namespace ea
