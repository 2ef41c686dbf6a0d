use nalgebra::{Matrix3, Point3, Vector3};

/// Rigid pose: rotation plus translation, mapping a local frame into the world.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidTransform {
    pub rotation: Matrix3<f64>,
    pub translation: Vector3<f64>,
}

impl RigidTransform {
    pub fn identity() -> Self {
        Self {
            rotation: Matrix3::identity(),
            translation: Vector3::zeros(),
        }
    }

    pub fn new(rotation: Matrix3<f64>, translation: Vector3<f64>) -> Self {
        Self {
            rotation,
            translation,
        }
    }

    /// Rotation from three orthonormal world-frame images of the local axes.
    pub fn from_axes(
        x: Vector3<f64>,
        y: Vector3<f64>,
        z: Vector3<f64>,
        translation: Vector3<f64>,
    ) -> Self {
        Self {
            rotation: Matrix3::from_columns(&[x, y, z]),
            translation,
        }
    }

    pub fn apply_point(&self, p: &Point3<f64>) -> Point3<f64> {
        Point3::from(self.rotation * p.coords + self.translation)
    }

    pub fn apply_vector(&self, v: &Vector3<f64>) -> Vector3<f64> {
        self.rotation * v
    }

    pub fn inverse(&self) -> Self {
        let rt = self.rotation.transpose();
        Self {
            rotation: rt,
            translation: -(rt * self.translation),
        }
    }

    pub fn compose(&self, other: &RigidTransform) -> Self {
        Self {
            rotation: self.rotation * other.rotation,
            translation: self.rotation * other.translation + self.translation,
        }
    }

    /// Local coordinates of a world point.
    pub fn to_local(&self, p: &Point3<f64>) -> Point3<f64> {
        Point3::from(self.rotation.transpose() * (p.coords - self.translation))
    }

    /// Deviation of the rotation block from a proper rotation: max of
    /// |R^T R - I| entries and |det(R) - 1|.
    pub fn rotation_defect(&self) -> f64 {
        let gram = self.rotation.transpose() * self.rotation;
        let mut defect: f64 = (self.rotation.determinant() - 1.0).abs();
        for i in 0..3 {
            for j in 0..3 {
                let target = if i == j { 1.0 } else { 0.0 };
                defect = defect.max((gram[(i, j)] - target).abs());
            }
        }
        defect
    }

    pub fn is_valid_rotation(&self, tol: f64) -> bool {
        self.rotation_defect() <= tol
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn rot_z(angle: f64) -> Matrix3<f64> {
        let (s, c) = angle.sin_cos();
        Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0)
    }

    #[test]
    fn inverse_roundtrip() {
        let t = RigidTransform::new(rot_z(0.7), Vector3::new(0.1, -0.2, 0.3));
        let p = Point3::new(0.05, 0.02, -0.01);
        let q = t.inverse().apply_point(&t.apply_point(&p));
        assert_relative_eq!(q, p, epsilon = 1e-12);
    }

    #[test]
    fn to_local_matches_inverse() {
        let t = RigidTransform::new(rot_z(-1.2), Vector3::new(1.0, 2.0, 3.0));
        let p = Point3::new(0.4, 0.5, 0.6);
        assert_relative_eq!(t.to_local(&p), t.inverse().apply_point(&p), epsilon = 1e-12);
    }

    #[test]
    fn rotation_defect_detects_scaling() {
        let mut t = RigidTransform::identity();
        assert!(t.is_valid_rotation(1e-12));
        t.rotation[(0, 0)] = 1.5;
        assert!(!t.is_valid_rotation(1e-9));
    }
}
