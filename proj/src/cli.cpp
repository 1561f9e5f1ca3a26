#include "oxpath/cli.hpp"

#include "oxpath/browser.hpp"
#include "oxpath/engine.hpp"
#include "oxpath/parser.hpp"

#include <fstream>

namespace oxpath::cli {

std::vector<std::string> comma_list(const std::string& s) {
    std::vector<std::string> out;
    for (auto& part : text::split(s, ',')) {
        auto t = text::trim(part);
        if (!t.empty()) out.push_back(t);
    }
    return out;
}

CliConfig parse_args(const std::vector<std::string>& args) {
    CliConfig cfg;
    auto value_of = [&](std::size_t& i) -> const std::string& {
        if (i + 1 >= args.size()) throw UsageError("flag " + args[i] + " needs a value");
        return args[++i];
    };
    for (std::size_t i = 0; i < args.size(); ++i) {
        const std::string& a = args[i];
        if (a == "-h" || a == "--help") cfg.help = true;
        else if (a == "-q") cfg.query_path = value_of(i);
        else if (a == "-o") cfg.output_path = value_of(i);
        else if (a == "--site") cfg.site_manifest = value_of(i);
        else if (a == "-mval") cfg.options.mval = true;
        else if (a == "-jsonarr") cfg.options.jsonarr = true;
        else if (a == "-xmlcd") cfg.options.xmlcd = true;
        else if (a == "-rsent") cfg.options.rsent = value_of(i);
        else if (a == "-rsattrs") cfg.options.rsattrs = comma_list(value_of(i));
        else if (a == "-hents") cfg.options.hents = comma_list(value_of(i));
        else if (a == "-f") {
            const std::string& f = value_of(i);
            if (f == "xml") cfg.format = Format::Xml;
            else if (f == "json") cfg.format = Format::Json;
            else if (f == "rscsv") cfg.format = Format::RsCsv;
            else if (f == "hcsv") cfg.format = Format::HCsv;
            else throw UsageError("flag -f: unknown format '" + f + "'");
        } else {
            throw UsageError("unknown flag " + a);
        }
    }
    if (cfg.help) return cfg;
    if (!cfg.query_path) throw UsageError("flag -q is required");
    if (!cfg.format) throw UsageError("flag -f is required");
    if (cfg.format == Format::RsCsv) {
        if (!cfg.options.rsent) throw UsageError("flag -rsent is required with -f rscsv");
        if (!cfg.options.rsattrs || cfg.options.rsattrs->empty())
            throw UsageError("flag -rsattrs is required with -f rscsv");
    }
    if (cfg.format == Format::HCsv && (!cfg.options.hents || cfg.options.hents->empty()))
        throw UsageError("flag -hents is required with -f hcsv");
    return cfg;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    if (args.empty()) {
        out << kUsage;
        return 0;
    }
    CliConfig cfg;
    try {
        cfg = parse_args(args);
    } catch (const Error& e) {
        err << "oxpath: " << e.what() << "\n";
        return 1;
    }
    if (cfg.help) {
        out << kUsage;
        return 0;
    }

    std::string source;
    SiteManifest site;
    try {
        source = read_file(*cfg.query_path);
        if (cfg.site_manifest) site = SiteManifest::load(*cfg.site_manifest);
    } catch (const Error& e) {
        err << "oxpath: " << e.what() << "\n";
        return 1;
    }

    // rscsv streams rows as records close; the other formats are written
    // only once the whole tree is known.
    std::ofstream file;
    if (cfg.output_path) {
        file.open(*cfg.output_path, std::ios::binary);
        if (!file) {
            err << "oxpath: flag -o: cannot write " << *cfg.output_path << "\n";
            return 1;
        }
    }
    std::ostream& dest = cfg.output_path ? static_cast<std::ostream&>(file) : out;
    try {
        Wrapper w = parse(source);
        BrowserSession session(std::move(site));
        Engine engine(session);
        if (cfg.format == Format::RsCsv) {
            RsCsvWriter writer(dest, cfg.options);
            engine.evaluate(w, writer);
        } else {
            TreeBuilder builder;
            engine.evaluate(w, builder);
            OutputNode tree = builder.finish();
            std::string text;
            switch (*cfg.format) {
            case Format::Xml: text = to_xml(tree, cfg.options); break;
            case Format::Json: text = to_json(tree, cfg.options); break;
            case Format::HCsv: text = to_hcsv(tree, cfg.options); break;
            case Format::RsCsv: break;
            }
            dest << text;
        }
    } catch (const SyntaxError& e) {
        err << "oxpath: syntax error: " << e.what() << "\n";
        return 2;
    } catch (const ValidationError& e) {
        err << "oxpath: invalid wrapper: " << e.what() << "\n";
        return 2;
    } catch (const EvaluationFailure& e) {
        err << "oxpath: evaluation failed at " << e.what() << "\n";
        return 2;
    } catch (const SerializeError& e) {
        err << "oxpath: " << e.what() << "\n";
        return 1;
    } catch (const ConfigError& e) {
        err << "oxpath: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        err << "oxpath: " << e.what() << "\n";
        return 2;
    }

    dest.flush();
    if (!dest) {
        err << "oxpath: failed to write output\n";
        return 1;
    }
    return 0;
}

} // namespace oxpath::cli
