#include "hamiltonia/json_io.hpp"

namespace hamiltonia::io {

Json to_json(const FourierSeries& f) {
    Json arr = Json::array();
    for (const auto& [nu, c] : f.coefficients()) {  // std::map: already sorted by nu
        Json rec;
        rec["nu"] = nu.entries();
        rec["re"] = c.real();
        rec["im"] = c.imag();
        arr.push_back(std::move(rec));
    }
    return arr;
}

FourierSeries series_from_json(const Json& j) {
    if (!j.is_array() || j.empty())
        throw PreconditionViolated("series_from_json: expected a nonempty coefficient list");
    const int dim = static_cast<int>(j.front().at("nu").size());
    FourierSeries f(dim);
    for (const auto& rec : j) {
        const HarmonicVector nu(rec.at("nu").get<std::vector<int>>());
        f.add(nu, Complex(rec.at("re").get<double>(), rec.at("im").get<double>()));
    }
    return f;
}

Json to_json(const VecFourierSeries& f) {
    Json arr = Json::array();
    for (const auto& [nu, c] : f.coefficients()) {
        Json rec;
        rec["nu"] = nu.entries();
        std::vector<double> re, im;
        for (const auto& v : c) {
            re.push_back(v.real());
            im.push_back(v.imag());
        }
        rec["re"] = re;
        rec["im"] = im;
        arr.push_back(std::move(rec));
    }
    return arr;
}

namespace {

Json subtree_json(const trees::LabeledTree& t, int v, const std::vector<std::vector<int>>& children) {
    Json node;
    node["nu"] = t.nu(v).entries();
    Json kids = Json::array();
    for (int w : children[static_cast<size_t>(v)]) kids.push_back(subtree_json(t, w, children));
    node["children"] = std::move(kids);
    return node;
}

}  // namespace

Json to_json(const trees::LabeledTree& t) {
    std::vector<std::vector<int>> children(static_cast<size_t>(t.order()));
    for (int v = 1; v < t.order(); ++v) children[static_cast<size_t>(t.parent[v])].push_back(v);
    Json j = subtree_json(t, 0, children);
    j["multiplicity"] = t.multiplicity;
    return j;
}

Json to_json(const lindstedt::TorusSeries& T) {
    Json j;
    j["omega"] = T.omega.omega();
    j["K"] = T.K;
    Json orders = Json::array();
    for (const auto& hk : T.orders) orders.push_back(to_json(hk));
    j["orders"] = std::move(orders);
    return j;
}

}  // namespace hamiltonia::io
