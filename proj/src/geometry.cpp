#include "deixis/geometry.hpp"

#include "deixis/error.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <set>

namespace deixis {

RigidTransform RigidTransform::inverse() const {
    RigidTransform inv;
    inv.rotation = rotation.transpose();
    inv.translation = -(inv.rotation * translation);
    return inv;
}

void CameraModel::validate() const {
    if (!(fx > 0.0) || !(fy > 0.0)) {
        throw Error(ErrorCode::InvalidConfig, "camera focal lengths must be positive");
    }
    if (width <= 0 || height <= 0) {
        throw Error(ErrorCode::InvalidConfig, "camera image size must be positive");
    }
    const Mat3& r = extrinsic.rotation;
    if (((r * r.transpose()) - Mat3::Identity()).cwiseAbs().maxCoeff() > 1e-9) {
        throw Error(ErrorCode::InvalidConfig, "extrinsic rotation is not orthonormal");
    }
    if (std::abs(r.determinant() - 1.0) > 1e-9) {
        throw Error(ErrorCode::InvalidConfig, "extrinsic rotation must have determinant +1");
    }
}

const ObjectRecord* Scene::find(const std::string& id) const {
    for (const auto& o : objects) {
        if (o.id == id) return &o;
    }
    return nullptr;
}

ObjectRecord* Scene::find(const std::string& id) {
    for (auto& o : objects) {
        if (o.id == id) return &o;
    }
    return nullptr;
}

void Scene::validate() const {
    std::set<std::string> seen;
    for (const auto& o : objects) {
        if (o.id.empty()) throw Error(ErrorCode::InvalidEpisode, "object with empty id");
        if (!seen.insert(o.id).second) {
            throw Error(ErrorCode::InvalidEpisode, "duplicate object id " + o.id);
        }
        if (!(o.height_m > 0.0) || !(o.width_m > 0.0)) {
            throw Error(ErrorCode::InvalidEpisode, "object " + o.id + " needs positive height and width");
        }
    }
}

Vec3 back_project_pixel(double u, double v, double depth_m, const CameraModel& cam) {
    const Vec3 p_cam((u - cam.cx) * depth_m / cam.fx, (v - cam.cy) * depth_m / cam.fy, depth_m);
    return cam.extrinsic.apply(p_cam);
}

ObjectRecord back_project(const Detection& det, const CameraModel& cam, std::string id) {
    if (!(det.depth_m > 0.0)) {
        throw Error(ErrorCode::NonPositiveDepth, "detection depth must be positive");
    }
    if (!(det.bbox.width() > 0.0) || !(det.bbox.height() > 0.0)) {
        throw Error(ErrorCode::DegenerateBBox, "bounding box has zero area");
    }
    const double u = det.bbox.center_u();
    const double v = det.bbox.center_v();
    if (u < 0.0 || v < 0.0 || u > cam.width || v > cam.height) {
        throw Error(ErrorCode::BBoxOutsideImage, "bounding box center lies outside the image");
    }
    ObjectRecord rec;
    rec.id = std::move(id);
    rec.class_name = det.class_name;
    rec.position = back_project_pixel(u, v, det.depth_m, cam);
    rec.width_m = det.bbox.width() * det.depth_m / cam.fx;
    rec.height_m = det.bbox.height() * det.depth_m / cam.fy;
    return rec;
}

Scene scene_from_detections(std::span<const Detection> dets, const CameraModel& cam,
                            double min_confidence, double timestamp) {
    Scene scene;
    scene.timestamp = timestamp;
    std::map<std::string, int> counters;
    for (const auto& det : dets) {
        if (det.confidence < min_confidence) continue;
        const int n = ++counters[det.class_name];
        scene.objects.push_back(back_project(det, cam, det.class_name + "#" + std::to_string(n)));
    }
    return scene;
}

DeicticRay forearm_ray(const SkeletonFrame& frame, double min_confidence) {
    if (frame.confidence < min_confidence) {
        throw Error(ErrorCode::LowConfidence, "skeleton confidence below threshold");
    }
    if ((frame.right_wrist - frame.right_elbow).norm() <= kMinRayLength) {
        throw Error(ErrorCode::DegenerateForearm, "elbow and wrist coincide");
    }
    return DeicticRay{frame.right_elbow, frame.right_wrist, frame.timestamp};
}

DeicticRay touch_ray(double u, double v, double timestamp, const CameraModel& cam) {
    return DeicticRay{cam.origin(), back_project_pixel(u, v, 1.0, cam), timestamp};
}

double point_line_distance(const DeicticRay& ray, const Vec3& xi) {
    const Vec3 dir = ray.r2 - ray.r1;
    const double len2 = dir.squaredNorm();
    if (!(len2 > kMinRayLength * kMinRayLength)) {
        throw Error(ErrorCode::DegenerateRay, "ray anchor points coincide");
    }
    const Vec3 unit = dir / std::sqrt(len2);
    return unit.cross(ray.r1 - xi).norm();
}

Selection select_object(const DeicticRay& ray, const Scene& scene, const std::string& class_filter,
                        double selection_radius) {
    const ObjectRecord* best = nullptr;
    double best_d = std::numeric_limits<double>::infinity();
    for (const auto& o : scene.objects) {
        if (o.class_name != class_filter) continue;
        const double d = point_line_distance(ray, o.position);
        if (d < best_d || (d == best_d && best != nullptr && o.id < best->id)) {
            best = &o;
            best_d = d;
        }
    }
    if (best == nullptr) {
        throw Error(ErrorCode::NoMatchingClass, "no object of class '" + class_filter + "' in scene");
    }
    if (best_d > selection_radius) {
        throw Error(ErrorCode::OutOfRange, "nearest " + class_filter + " is " + std::to_string(best_d) +
                                               " m from the pointing line")
            .with_object(best->id);
    }
    return Selection{*best, best_d};
}

}  // namespace deixis
