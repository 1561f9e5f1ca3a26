#pragma once

// Command-line front end. Flags follow the reference client's single-dash
// spelling (-mval, -jsonarr, ...), which is why they are parsed by hand.

#include "oxpath/error.hpp"
#include "oxpath/serializers.hpp"

#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace oxpath::cli {

enum class Format { Xml, Json, RsCsv, HCsv };

struct CliConfig {
    std::optional<std::string> query_path;
    std::optional<Format> format;
    std::optional<std::string> output_path;
    SerializeOptions options;
    std::optional<std::string> site_manifest;
    bool help = false;
};

inline constexpr const char* kUsage =
    "usage: oxpath -q <wrapper_file> -f <xml|json|rscsv|hcsv> [options]\n"
    "\n"
    "A list of available parameters:\n"
    "  -q <file>          file holding the OXPath wrapper\n"
    "  -f <format>        output format: xml, json, rscsv or hcsv\n"
    "  -o <file>          write output to <file> instead of standard output\n"
    "  -mval              allow several attributes with the same name under one record\n"
    "  -jsonarr           emit repeated names as JSON arrays (required with -mval for json)\n"
    "  -xmlcd             wrap every XML attribute value in CDATA\n"
    "  -rsent <name>      rscsv: record type that forms one row\n"
    "  -rsattrs <a,b,..>  rscsv: attribute columns\n"
    "  -hents <p1,p2,..>  hcsv: record paths from outer to inner level, e.g. collection,articles/article\n"
    "  --site <file>      site manifest mapping URLs to local pages and scripted behaviour\n"
    "  -h                 print this text\n"
    "\n"
    "Exit codes: 0 success, 1 usage or configuration error, 2 parse or evaluation error.\n";

class UsageError : public Error {
public:
    using Error::Error;
};

/// Splits a comma-separated flag value, dropping blanks.
std::vector<std::string> comma_list(const std::string& s);

/// Parses flags in any order; throws UsageError naming the offending flag.
CliConfig parse_args(const std::vector<std::string>& args);

/// Runs the client; returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace oxpath::cli
