#include "psbfem/deck.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <set>
#include <sstream>

#include "psbfem/errors.hpp"

namespace psb {

namespace {

std::string trim(std::string s) {
    const auto not_space = [](unsigned char c) { return !std::isspace(c); };
    s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
    s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
    return s;
}

std::string upper(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    return s;
}

// collapse internal whitespace runs so "*USER  ELEMENT" matches
std::string normalize_keyword(const std::string& s) {
    std::string out;
    bool in_space = false;
    for (unsigned char c : s) {
        if (std::isspace(c)) {
            in_space = true;
            continue;
        }
        if (in_space && !out.empty()) out.push_back(' ');
        in_space = false;
        out.push_back(static_cast<char>(std::toupper(c)));
    }
    return out;
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(trim(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    fields.push_back(trim(cur));
    // a trailing comma leaves one empty field; drop it
    if (fields.size() > 1 && fields.back().empty()) fields.pop_back();
    return fields;
}

bool parse_int(const std::string& s, int& out) {
    const std::string t = trim(s);
    if (t.empty()) return false;
    const char* b = t.data();
    const char* e = b + t.size();
    auto [p, ec] = std::from_chars(b, e, out);
    return ec == std::errc() && p == e;
}

bool parse_double(const std::string& s, double& out) {
    const std::string t = trim(s);
    if (t.empty()) return false;
    try {
        std::size_t pos = 0;
        out = std::stod(t, &pos);
        return pos == t.size();
    } catch (...) {
        return false;
    }
}

// "U5" -> 5; anything else -> -1
int un_tag_count(const std::string& type) {
    if (type.size() < 2 || std::toupper(static_cast<unsigned char>(type[0])) != 'U') return -1;
    int n = 0;
    if (!parse_int(type.substr(1), n) || n < 1) return -1;
    return n;
}

struct KeywordLine {
    std::string keyword;
    std::map<std::string, std::string> params;  // keys uppercased
};

KeywordLine parse_keyword_line(const std::string& line) {
    KeywordLine kw;
    const auto fields = split_fields(line);
    kw.keyword = normalize_keyword(fields[0]);
    for (std::size_t i = 1; i < fields.size(); ++i) {
        const std::string& f = fields[i];
        const auto eq = f.find('=');
        if (eq == std::string::npos) {
            kw.params[upper(trim(f))] = "";
        } else {
            kw.params[upper(trim(f.substr(0, eq)))] = trim(f.substr(eq + 1));
        }
    }
    return kw;
}

class DeckParser {
  public:
    DeckModel run(const std::string& text) {
        std::istringstream in(text);
        std::string raw;
        int line_no = 0;
        while (std::getline(in, raw)) {
            ++line_no;
            if (!raw.empty() && raw.back() == '\r') raw.pop_back();
            const std::string line = trim(raw);
            if (line.empty()) continue;
            if (line.rfind("**", 0) == 0) continue;  // comment
            if (line[0] == '*')
                keyword_line(line, line_no);
            else
                data_line(line, line_no);
        }
        cross_check();
        return std::move(deck_);
    }

  private:
    enum class Section { none, skip, user_element, node, element, property };

    void error(int line, std::string msg) {
        deck_.diagnostics.push_back({true, line, std::move(msg)});
    }
    void warn(int line, std::string msg) {
        deck_.diagnostics.push_back({false, line, std::move(msg)});
    }

    void keyword_line(const std::string& line, int line_no) {
        const KeywordLine kw = parse_keyword_line(line);
        if (kw.keyword == "*USER ELEMENT") {
            DeckUserElement ue;
            ue.line = line_no;
            ue.type = get(kw, "TYPE");
            if (ue.type.empty()) error(line_no, "*USER ELEMENT needs TYPE=");
            if (!get_int(kw, "NODES", ue.nodes))
                error(line_no, "*USER ELEMENT needs an integer NODES=");
            get_int(kw, "PROPERTIES", ue.properties);
            get_int(kw, "COORDINATES", ue.coordinates);
            const int tag_n = un_tag_count(ue.type);
            if (tag_n < 0)
                error(line_no, "element type \"" + ue.type + "\" is not of the form Un");
            else if (ue.nodes != 0 && ue.nodes != tag_n)
                error(line_no, "type " + ue.type + " declares NODES=" +
                                   std::to_string(ue.nodes) + ", tag implies " +
                                   std::to_string(tag_n));
            deck_.user_elements.push_back(std::move(ue));
            section_ = Section::user_element;
        } else if (kw.keyword == "*NODE") {
            section_ = Section::node;
        } else if (kw.keyword == "*ELEMENT") {
            DeckElementBlock blk;
            blk.line = line_no;
            blk.type = get(kw, "TYPE");
            blk.elset = get(kw, "ELSET");
            if (blk.type.empty()) error(line_no, "*ELEMENT needs TYPE=");
            if (un_tag_count(blk.type) < 0 && !blk.type.empty())
                error(line_no, "element type \"" + blk.type +
                                   "\" is not supported; only Un polygon types are");
            deck_.element_blocks.push_back(std::move(blk));
            section_ = Section::element;
        } else if (kw.keyword == "*UEL PROPERTY") {
            DeckProperty prop;
            prop.line = line_no;
            prop.elset = get(kw, "ELSET");
            // Accept the widely seen ELEST misspelling as an alias.
            if (prop.elset.empty()) prop.elset = get(kw, "ELEST");
            if (prop.elset.empty()) error(line_no, "*UEL PROPERTY needs ELSET=");
            deck_.properties.push_back(std::move(prop));
            section_ = Section::property;
        } else {
            error(line_no, "unsupported keyword \"" + kw.keyword +
                               "\"; accepted: *USER ELEMENT, *NODE, *ELEMENT, *UEL PROPERTY");
            section_ = Section::skip;
        }
    }

    void data_line(const std::string& line, int line_no) {
        const auto fields = split_fields(line);
        switch (section_) {
            case Section::none:
                error(line_no, "data record before any keyword");
                break;
            case Section::skip:
                break;  // body of a rejected keyword
            case Section::user_element: {
                DeckUserElement& ue = deck_.user_elements.back();
                for (const auto& f : fields) {
                    int dof = 0;
                    if (!parse_int(f, dof)) {
                        error(line_no, "active-dof record must list integers, got \"" + f + "\"");
                        return;
                    }
                    ue.active_dofs.push_back(dof);
                }
                break;
            }
            case Section::node: {
                DeckNode nd;
                nd.line = line_no;
                if (fields.size() < 3 || !parse_int(fields[0], nd.id) ||
                    !parse_double(fields[1], nd.x) || !parse_double(fields[2], nd.y)) {
                    error(line_no, "node record must be id, x, y");
                    return;
                }
                if (fields.size() > 3) warn(line_no, "node record has extra fields; using x, y");
                deck_.nodes.push_back(nd);
                break;
            }
            case Section::element: {
                DeckElementBlock& blk = deck_.element_blocks.back();
                DeckElement el;
                el.line = line_no;
                if (fields.size() < 2 || !parse_int(fields[0], el.id)) {
                    error(line_no, "element record must be id, n1, n2, ...");
                    return;
                }
                for (std::size_t i = 1; i < fields.size(); ++i) {
                    int nid = 0;
                    if (!parse_int(fields[i], nid)) {
                        error(line_no, "element record has a non-integer node id \"" +
                                           fields[i] + "\"");
                        return;
                    }
                    el.node_ids.push_back(nid);
                }
                const int tag_n = un_tag_count(blk.type);
                if (tag_n > 0 && static_cast<int>(el.node_ids.size()) != tag_n)
                    error(line_no, "element " + std::to_string(el.id) + " lists " +
                                       std::to_string(el.node_ids.size()) + " nodes but type " +
                                       blk.type + " requires " + std::to_string(tag_n));
                blk.elements.push_back(std::move(el));
                break;
            }
            case Section::property: {
                DeckProperty& prop = deck_.properties.back();
                for (const auto& f : fields) {
                    double v = 0.0;
                    if (!parse_double(f, v)) {
                        error(line_no, "property record must list numbers, got \"" + f + "\"");
                        return;
                    }
                    prop.values.push_back(v);
                }
                break;
            }
        }
    }

    void cross_check() {
        std::set<std::string> elsets;
        std::map<int, int> node_lines, elem_lines;
        for (const auto& blk : deck_.element_blocks)
            if (!blk.elset.empty()) elsets.insert(blk.elset);
        for (const auto& prop : deck_.properties)
            if (!prop.elset.empty() && !elsets.count(prop.elset))
                error(prop.line, "*UEL PROPERTY references undefined element set \"" +
                                     prop.elset + "\"");
        for (const auto& nd : deck_.nodes) {
            auto [it, fresh] = node_lines.emplace(nd.id, nd.line);
            if (!fresh)
                error(nd.line, "duplicate node id " + std::to_string(nd.id) +
                                   " (first defined at line " + std::to_string(it->second) + ")");
        }
        for (const auto& blk : deck_.element_blocks)
            for (const auto& el : blk.elements) {
                auto [it, fresh] = elem_lines.emplace(el.id, el.line);
                if (!fresh)
                    error(el.line, "duplicate element id " + std::to_string(el.id) +
                                       " (first defined at line " + std::to_string(it->second) +
                                       ")");
            }
        for (const auto& blk : deck_.element_blocks) {
            bool declared = false;
            for (const auto& ue : deck_.user_elements)
                if (upper(ue.type) == upper(blk.type)) declared = true;
            if (!declared && un_tag_count(blk.type) > 0)
                warn(blk.line, "element type " + blk.type + " used without *USER ELEMENT");
        }
    }

    static std::string get(const KeywordLine& kw, const std::string& key) {
        auto it = kw.params.find(key);
        return it == kw.params.end() ? std::string() : it->second;
    }
    static bool get_int(const KeywordLine& kw, const std::string& key, int& out) {
        auto it = kw.params.find(key);
        return it != kw.params.end() && parse_int(it->second, out);
    }

    DeckModel deck_;
    Section section_ = Section::none;
};

}  // namespace

bool DeckModel::ok() const {
    return std::none_of(diagnostics.begin(), diagnostics.end(),
                        [](const DeckDiagnostic& d) { return d.is_error; });
}

std::string DeckModel::first_error() const {
    for (const auto& d : diagnostics)
        if (d.is_error) return d.message + " (line " + std::to_string(d.line) + ")";
    return {};
}

DeckModel parse_inp(const std::string& text) { return DeckParser().run(text); }

SeepageModel deck_to_model(const DeckModel& deck, const DeckOverlay& overlay) {
    for (const auto& d : deck.diagnostics)
        if (d.is_error) throw Error(ErrorCode::parse, d.message, d.line);

    SeepageModel model;
    model.unit_note = overlay.unit_note;
    for (const auto& nd : deck.nodes) model.mesh.nodes.push_back({nd.id, {nd.x, nd.y}});
    model.mesh.sort_nodes();

    // one material per property record, ids 1..N in record order
    std::map<std::string, int> set_material;
    int next_id = 1;
    for (const auto& prop : deck.properties) {
        if (prop.values.size() < 2)
            throw Error(ErrorCode::parse,
                        "property record for set \"" + prop.elset +
                            "\" needs two values (kx, ky)",
                        prop.line);
        if (prop.values.size() > 2)
            throw Error(ErrorCode::parse,
                        "property record for set \"" + prop.elset + "\" has " +
                            std::to_string(prop.values.size()) + " values; expected kx, ky",
                        prop.line);
        if (!set_material.emplace(prop.elset, next_id).second)
            throw Error(ErrorCode::parse,
                        "element set \"" + prop.elset + "\" has more than one property record",
                        prop.line);
        model.materials[next_id] = {prop.values[0], prop.values[1], overlay.Ss};
        ++next_id;
    }

    for (const auto& blk : deck.element_blocks) {
        auto it = set_material.find(blk.elset);
        if (it == set_material.end())
            throw Error(ErrorCode::parse,
                        "element set \"" + blk.elset + "\" has no *UEL PROPERTY record",
                        blk.line);
        for (const auto& el : blk.elements)
            model.mesh.elements.push_back({el.id, el.node_ids, it->second});
    }

    model.dirichlet = overlay.dirichlet;
    model.flux = overlay.flux;
    model.schedules = overlay.schedules;
    model.transient = overlay.transient;
    model.monitors = overlay.monitors;

    const ValidationReport report = validate_mesh(model.mesh);
    if (!report.pass()) throw Error(ErrorCode::model, report.to_string());
    model.validate();
    return model;
}

}  // namespace psb
