#include "evolvekit/model.hpp"

#include <algorithm>
#include <set>

#include "evolvekit/error.hpp"

namespace evolvekit {

const MObject* Model::find(std::string_view id) const {
    auto it = objects.find(std::string(id));
    return it == objects.end() ? nullptr : &it->second;
}

MObject* Model::find(std::string_view id) {
    auto it = objects.find(std::string(id));
    return it == objects.end() ? nullptr : &it->second;
}

void Model::normalize() {
    std::sort(roots.begin(), roots.end());
    for (auto& [id, obj] : objects) {
        for (auto it = obj.children.begin(); it != obj.children.end();) {
            if (it->second.empty()) {
                it = obj.children.erase(it);
            } else {
                std::sort(it->second.begin(), it->second.end());
                ++it;
            }
        }
    }
}

namespace {

[[noreturn]] void illformed(const std::string& what) {
    throw Error(ErrorCode::ModelIllformed, what);
}

}  // namespace

void Model::validate() {
    normalize();
    for (const auto& [key, obj] : objects)
        if (key != obj.id) illformed("object keyed '" + key + "' has id '" + obj.id + "'");
    for (const auto& [key, link] : links) {
        if (key != link.id) illformed("link keyed '" + key + "' has id '" + link.id + "'");
        if (objects.count(link.id))
            illformed("id '" + link.id + "' is used by both an object and a link");
        if (!find(link.src)) illformed("link '" + link.id + "': unknown src '" + link.src + "'");
        if (!find(link.dst)) illformed("link '" + link.id + "': unknown dst '" + link.dst + "'");
    }

    std::set<std::string> rootSet;
    for (const auto& r : roots) {
        if (!find(r)) illformed("unknown root '" + r + "'");
        if (!rootSet.insert(r).second) illformed("root '" + r + "' listed twice");
    }

    std::map<std::string, std::string> parentOf;
    for (const auto& [id, obj] : objects) {
        for (const auto& [role, kids] : obj.children) {
            for (std::size_t i = 0; i < kids.size(); ++i) {
                const auto& kid = kids[i];
                if (!find(kid))
                    illformed("object '" + id + "' role '" + role + "': unknown child '" + kid + "'");
                if (i > 0 && kids[i - 1] == kid)
                    illformed("object '" + id + "' lists child '" + kid + "' twice");
                auto [it, fresh] = parentOf.emplace(kid, id);
                if (!fresh)
                    illformed("object '" + kid + "' has two parents ('" + it->second + "' and '" +
                              id + "')");
                if (rootSet.count(kid)) illformed("root '" + kid + "' is contained by '" + id + "'");
            }
        }
    }
    for (const auto& [id, obj] : objects) {
        if (!rootSet.count(id) && !parentOf.count(id))
            illformed("object '" + id + "' is neither a root nor contained");
    }
    // Every object has exactly one parent or is a root; whatever the roots do not
    // reach sits on a containment cycle.
    std::set<std::string> reached;
    std::vector<std::string> stack(roots.begin(), roots.end());
    while (!stack.empty()) {
        auto id = std::move(stack.back());
        stack.pop_back();
        if (!reached.insert(id).second) continue;
        for (const auto& [role, kids] : find(id)->children)
            stack.insert(stack.end(), kids.begin(), kids.end());
    }
    for (const auto& [id, obj] : objects)
        if (!reached.count(id)) illformed("containment cycle through object '" + id + "'");
}

std::map<std::string, ParentRef> parent_index(const Model& model) {
    std::map<std::string, ParentRef> out;
    for (const auto& [id, obj] : model.objects)
        for (const auto& [role, kids] : obj.children)
            for (const auto& kid : kids) out[kid] = ParentRef{id, role};
    return out;
}

std::vector<std::string> preorder(const Model& model) {
    std::vector<std::string> out;
    std::set<std::string> seen;
    std::vector<std::string> stack(model.roots.rbegin(), model.roots.rend());
    std::sort(stack.rbegin(), stack.rend());
    while (!stack.empty()) {
        auto id = std::move(stack.back());
        stack.pop_back();
        const MObject* obj = model.find(id);
        if (!obj || !seen.insert(id).second) continue;
        out.push_back(id);
        std::vector<std::string> kids;
        for (const auto& [role, ks] : obj->children) kids.insert(kids.end(), ks.begin(), ks.end());
        std::sort(kids.rbegin(), kids.rend());
        stack.insert(stack.end(), kids.begin(), kids.end());
    }
    return out;
}

std::vector<std::string> subtree(const Model& model, std::string_view id) {
    std::vector<std::string> out;
    std::vector<std::string> stack{std::string(id)};
    std::set<std::string> seen;
    while (!stack.empty()) {
        auto cur = std::move(stack.back());
        stack.pop_back();
        const MObject* obj = model.find(cur);
        if (!obj || !seen.insert(cur).second) continue;
        out.push_back(cur);
        for (const auto& [role, kids] : obj->children) stack.insert(stack.end(), kids.begin(), kids.end());
    }
    return out;
}

}  // namespace evolvekit
