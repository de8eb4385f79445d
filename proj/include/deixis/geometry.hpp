#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace deixis {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Rigid transform from one frame into another: p' = R p + t.
struct RigidTransform {
    Mat3 rotation = Mat3::Identity();
    Vec3 translation = Vec3::Zero();

    Vec3 apply(const Vec3& p) const { return rotation * p + translation; }
    Vec3 apply_direction(const Vec3& d) const { return rotation * d; }
    RigidTransform inverse() const;
};

/// Pinhole intrinsics plus the camera -> robot-base extrinsic.
struct CameraModel {
    double fx = 1.0;
    double fy = 1.0;
    double cx = 0.0;
    double cy = 0.0;
    int width = 640;
    int height = 480;
    RigidTransform extrinsic;

    /// Throws InvalidConfig unless fx, fy > 0 and the rotation is proper
    /// orthonormal within 1e-9.
    void validate() const;

    /// Camera optical center in the base frame.
    Vec3 origin() const { return extrinsic.translation; }
};

/// Axis-aligned image box in pixels.
struct BBox {
    double x_min = 0.0;
    double y_min = 0.0;
    double x_max = 0.0;
    double y_max = 0.0;

    double width() const { return x_max - x_min; }
    double height() const { return y_max - y_min; }
    double center_u() const { return 0.5 * (x_min + x_max); }
    double center_v() const { return 0.5 * (y_min + y_max); }
};

struct Detection {
    std::string class_name;
    BBox bbox;
    double depth_m = 0.0;
    double timestamp = 0.0;
    double confidence = 1.0;
};

/// A scene object: class label, 3D position in the base frame, and the
/// metric height/width used for grasping and clearance.
struct ObjectRecord {
    std::string id;
    std::string class_name;
    Vec3 position = Vec3::Zero();
    double height_m = 0.0;
    double width_m = 0.0;

    bool operator==(const ObjectRecord&) const = default;
};

struct Scene {
    std::vector<ObjectRecord> objects;
    double timestamp = 0.0;

    const ObjectRecord* find(const std::string& id) const;
    ObjectRecord* find(const std::string& id);

    /// Throws InvalidEpisode on duplicate ids or non-positive extents.
    void validate() const;

    bool operator==(const Scene&) const = default;
};

struct SkeletonFrame {
    double timestamp = 0.0;
    Vec3 right_elbow = Vec3::Zero();
    Vec3 right_wrist = Vec3::Zero();
    double confidence = 1.0;
};

/// Pointing line through r1 and r2.
struct DeicticRay {
    Vec3 r1 = Vec3::Zero();
    Vec3 r2 = Vec3::UnitX();
    double timestamp = 0.0;

    Vec3 direction() const { return r2 - r1; }
    bool operator==(const DeicticRay&) const = default;
};

struct SelectionConfig {
    double radius_m = 0.5;
    double min_skeleton_confidence = 0.3;
    double min_detection_confidence = 0.25;
};

struct Selection {
    ObjectRecord object;
    double distance_m = 0.0;
};

inline constexpr double kMinRayLength = 1e-6;

/// Back-projects the bbox center at det.depth_m through the pinhole model and
/// moves it into the base frame. Width and height are the bbox extents scaled
/// to metres at that depth.
ObjectRecord back_project(const Detection& det, const CameraModel& cam, std::string id);

/// Base-frame point for pixel (u, v) at the given depth along the optical axis.
Vec3 back_project_pixel(double u, double v, double depth_m, const CameraModel& cam);

/// Builds a Scene from one detection frame. Detections under the confidence
/// floor are dropped; ids are "<class>#<n>" numbered per class in input order.
Scene scene_from_detections(std::span<const Detection> dets, const CameraModel& cam,
                            double min_confidence, double timestamp);

DeicticRay forearm_ray(const SkeletonFrame& frame, double min_confidence = 0.3);

/// Touch selection: a ray from the camera center through the touched pixel.
DeicticRay touch_ray(double u, double v, double timestamp, const CameraModel& cam);

/// Perpendicular distance from xi to the infinite line through r1, r2.
double point_line_distance(const DeicticRay& ray, const Vec3& xi);

/// Nearest object of class `class_filter` to the ray. Ties go to the
/// lexicographically smallest id. Throws NoMatchingClass or OutOfRange.
Selection select_object(const DeicticRay& ray, const Scene& scene, const std::string& class_filter,
                        double selection_radius = 0.5);

}  // namespace deixis
