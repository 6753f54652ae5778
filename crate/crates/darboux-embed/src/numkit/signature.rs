use super::Vec3;

/// Diagonal signature of the ambient inner product.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Signature {
    /// (+,+,+)
    Euclidean,
    /// (+,-,-)
    Lorentz,
}

impl Signature {
    pub fn diag(self) -> [f64; 3] {
        match self {
            Signature::Euclidean => [1.0, 1.0, 1.0],
            Signature::Lorentz => [1.0, -1.0, -1.0],
        }
    }

    pub fn gram(self) -> super::Mat3 {
        let d = self.diag();
        super::Mat3::from_diagonal(&Vec3::new(d[0], d[1], d[2]))
    }

    pub fn dot(self, a: &Vec3, b: &Vec3) -> f64 {
        let d = self.diag();
        d[0] * a[0] * b[0] + d[1] * a[1] * b[1] + d[2] * a[2] * b[2]
    }

    pub fn quad(self, a: &Vec3) -> f64 {
        self.dot(a, a)
    }

    /// Vector `n` with `dot(n, w) = det[a b w]` for all `w`, i.e. the
    /// signature-raised cross product.
    pub fn normal(self, a: &Vec3, b: &Vec3) -> Vec3 {
        let c = a.cross(b);
        let d = self.diag();
        Vec3::new(c[0] * d[0], c[1] * d[1], c[2] * d[2])
    }
}
