#include "pspace/ncl.hpp"

#include <algorithm>
#include <map>
#include <unordered_set>

#include "json.hpp"

namespace pspace::ncl {

using nlohmann::json;

Embedding Instance::embedding() const {
    Embedding m;
    for (const Edge& e : edges) m.ends.push_back({e.tail, e.head});
    m.rotation = rotation;
    return m;
}

State initial_state(const Instance& in) { return State{std::vector<uint8_t>(in.edges.size(), 0)}; }

int in_weight(const Instance& in, const State& s, int v) {
    int w = 0;
    for (int e : in.rotation[v])
        if (head_of(in, s, e) == v) w += weight(in.edges[e].color);
    return w;
}

bool satisfied(const Instance& in, const State& s) {
    for (int v = 0; v < in.num_vertices(); ++v)
        if (in_weight(in, s, v) < 2) return false;
    return true;
}

std::vector<int> legal_flips(const Instance& in, const State& s) {
    std::vector<int> out;
    for (int e = 0; e < int(in.edges.size()); ++e) {
        int h = head_of(in, s, e);
        if (in_weight(in, s, h) - weight(in.edges[e].color) >= 2) out.push_back(e);
    }
    return out;
}

State apply_flip(const Instance& in, const State& s, int e) {
    if (e < 0 || e >= int(in.edges.size())) throw IllegalFlip("no such edge");
    int h = head_of(in, s, e);
    if (in_weight(in, s, h) - weight(in.edges[e].color) < 2) throw IllegalFlip("flip leaves vertex underweight");
    State t = s;
    t.flipped[e] ^= 1;
    return t;
}

bool is_won(const Instance& in, const State& s) {
    bool at_from_to = s.flipped[in.target] == 0;
    return at_from_to == in.target_from_to;
}

std::vector<std::string> validate(const Instance& in) {
    std::vector<std::string> bad;
    int V = in.num_vertices();
    if (int(in.rotation.size()) != V) return {"rotation does not cover every vertex"};
    std::vector<std::string> names;
    for (auto& v : in.vertices) names.push_back(v.id);
    for (auto& m : in.embedding().check(names)) bad.push_back(m);
    if (!bad.empty()) return bad;
    for (int v = 0; v < V; ++v) {
        const Vertex& x = in.vertices[v];
        int red = 0, blue = 0;
        for (int e : in.rotation[v]) (in.edges[e].color == Color::Red ? red : blue)++;
        if (red + blue != 3) bad.push_back("vertex " + x.id + " does not have degree 3");
        if (x.kind == Kind::And && !(red == 2 && blue == 1))
            bad.push_back("AND vertex " + x.id + " needs two red and one blue edge");
        if (x.kind == Kind::Or) {
            if (blue != 3) bad.push_back("OR vertex " + x.id + " needs three blue edges");
            bool ok = x.prot[0] >= 0 && x.prot[1] >= 0 && x.prot[0] != x.prot[1];
            for (int p : x.prot)
                if (ok && std::find(in.rotation[v].begin(), in.rotation[v].end(), p) == in.rotation[v].end()) ok = false;
            if (!ok) bad.push_back("OR vertex " + x.id + " needs a protected pair of its own edges");
        }
    }
    if (in.target < 0 || in.target >= int(in.edges.size())) bad.push_back("target edge missing");
    if (bad.empty() && !satisfied(in, initial_state(in))) bad.push_back("initial orientation violates a vertex constraint");
    return bad;
}

static std::string pack(const State& s) { return std::string(s.flipped.begin(), s.flipped.end()); }

bool verify_protected(const Instance& in, size_t budget) {
    State s0 = initial_state(in);
    std::unordered_set<std::string> seen{pack(s0)};
    std::vector<State> stack{s0};
    while (!stack.empty()) {
        State s = std::move(stack.back());
        stack.pop_back();
        for (int v = 0; v < in.num_vertices(); ++v) {
            const Vertex& x = in.vertices[v];
            if (x.kind == Kind::Or && head_of(in, s, x.prot[0]) == v && head_of(in, s, x.prot[1]) == v) return false;
        }
        for (int e : legal_flips(in, s)) {
            State t = s;
            t.flipped[e] ^= 1;
            if (seen.insert(pack(t)).second) {
                if (seen.size() > budget) throw BudgetExceeded("verify_protected: state budget exceeded");
                stack.push_back(std::move(t));
            }
        }
    }
    return true;
}

uint8_t or_inward_mask(const Instance& in, const State& s, int v) {
    uint8_t m = 0;
    for (int i = 0; i < int(in.rotation[v].size()); ++i)
        if (head_of(in, s, in.rotation[v][i]) == v) m |= uint8_t(1u << i);
    return m;
}

static std::string sid(const json& j) {
    if (j.is_number_integer()) return std::to_string(j.get<long long>());
    if (!j.is_string()) throw std::runtime_error("ids must be strings or integers");
    return j.get<std::string>();
}

Instance from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::runtime_error(std::string("JSON parse error: ") + e.what());
    }
    Instance in;
    try {
        std::map<std::string, int> vix, eix;
        std::vector<std::pair<std::string, std::string>> prot;
        for (const json& v : j.at("vertices")) {
            Vertex x;
            x.id = sid(v.at("id"));
            std::string k = v.at("kind").get<std::string>();
            if (k == "and")
                x.kind = Kind::And;
            else if (k == "or")
                x.kind = Kind::Or;
            else
                throw std::runtime_error("unknown vertex kind '" + k + "'");
            if (v.contains("protected")) {
                const json& p = v.at("protected");
                if (!p.is_array() || p.size() != 2) throw std::runtime_error("protected must list two edges");
                prot.push_back({sid(p[0]), sid(p[1])});
            } else {
                prot.push_back({"", ""});
            }
            if (!vix.emplace(x.id, int(in.vertices.size())).second) throw std::runtime_error("duplicate vertex id " + x.id);
            in.vertices.push_back(x);
        }
        auto vert = [&](const json& x) {
            auto it = vix.find(sid(x));
            if (it == vix.end()) throw std::runtime_error("unknown vertex id " + sid(x));
            return it->second;
        };
        for (const json& e : j.at("edges")) {
            Edge ed;
            ed.id = sid(e.at("id"));
            ed.tail = vert(e.at("from"));
            ed.head = vert(e.at("to"));
            std::string c = e.at("color").get<std::string>();
            if (c == "red")
                ed.color = Color::Red;
            else if (c == "blue")
                ed.color = Color::Blue;
            else
                throw std::runtime_error("unknown edge colour '" + c + "'");
            if (!eix.emplace(ed.id, int(in.edges.size())).second) throw std::runtime_error("duplicate edge id " + ed.id);
            in.edges.push_back(ed);
        }
        auto edge = [&](const std::string& s) {
            auto it = eix.find(s);
            if (it == eix.end()) throw std::runtime_error("unknown edge id " + s);
            return it->second;
        };
        for (int v = 0; v < in.num_vertices(); ++v)
            if (!prot[v].first.empty()) {
                in.vertices[v].prot[0] = edge(prot[v].first);
                in.vertices[v].prot[1] = edge(prot[v].second);
            }
        in.rotation.assign(in.vertices.size(), {});
        for (auto& [vid, lst] : j.at("rotation").items()) {
            auto it = vix.find(vid);
            if (it == vix.end()) throw std::runtime_error("rotation names unknown vertex " + vid);
            for (const json& x : lst) in.rotation[it->second].push_back(edge(sid(x)));
        }
        in.target = edge(sid(j.at("target")));
        std::string td = j.at("target_direction").get<std::string>();
        if (td == "from_to")
            in.target_from_to = true;
        else if (td == "to_from")
            in.target_from_to = false;
        else
            throw std::runtime_error("target_direction must be from_to or to_from");
    } catch (const json::exception& e) {
        throw std::runtime_error(std::string("malformed NCL instance: ") + e.what());
    }
    return in;
}

std::string to_json_text(const Instance& in, const State& s) {
    json j;
    json vs = json::array();
    for (const Vertex& v : in.vertices) {
        json x = {{"id", v.id}, {"kind", v.kind == Kind::And ? "and" : "or"}};
        if (v.kind == Kind::Or && v.prot[0] >= 0) x["protected"] = {in.edges[v.prot[0]].id, in.edges[v.prot[1]].id};
        vs.push_back(x);
    }
    j["vertices"] = vs;
    json es = json::array();
    for (int e = 0; e < int(in.edges.size()); ++e) {
        const Edge& ed = in.edges[e];
        int t = s.flipped[e] ? ed.head : ed.tail, h = s.flipped[e] ? ed.tail : ed.head;
        es.push_back({{"id", ed.id},
                      {"from", in.vertices[t].id},
                      {"to", in.vertices[h].id},
                      {"color", ed.color == Color::Red ? "red" : "blue"}});
    }
    j["edges"] = es;
    json rot = json::object();
    for (int v = 0; v < in.num_vertices(); ++v) {
        json l = json::array();
        for (int e : in.rotation[v]) l.push_back(in.edges[e].id);
        rot[in.vertices[v].id] = l;
    }
    j["rotation"] = rot;
    j["target"] = in.edges[in.target].id;
    bool ft = in.target_from_to != bool(s.flipped[in.target]);
    j["target_direction"] = ft ? "from_to" : "to_from";
    return j.dump(2) + "\n";
}

}  // namespace pspace::ncl
