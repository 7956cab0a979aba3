//! Flat-array evaluation of the bound functionals, used inside the search loops.

use crate::prob::{clamp_info, entropy_of, DistortionMeasure, JointDist};

use super::{argmin_lowest, RegionError, Result};

/// Source tensor and distortion table laid out for repeated evaluation.
#[derive(Debug, Clone)]
pub(crate) struct SourceModel {
    pub nx: usize,
    pub ny: usize,
    pub nz: usize,
    pub nxh: usize,
    pub pxy: Vec<f64>,
    pub pxz: Vec<f64>,
    pub px: Vec<f64>,
    pub dist: Vec<f64>,
    pub h_y: f64,
    pub h_xy: f64,
}

/// Everything that depends on `p(v|x)` alone.
#[derive(Debug, Clone)]
pub(crate) struct VPart {
    pub nv: usize,
    /// `p(x,z,v)`
    pub pxzv: Vec<f64>,
    /// `p(y,v)` and `p(z,v)`
    pub pyv: Vec<f64>,
    pub pzv: Vec<f64>,
    pub pv: Vec<f64>,
    pub rate_min: f64,
    pub distortion: f64,
    pub recon: Vec<usize>,
    pub h_yv: f64,
    pub h_zv: f64,
    pub h_x_given_zv: f64,
}

/// Terms that also depend on `p(u|v)`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct UPart {
    pub i_yv_given_u: f64,
    pub i_zv_given_u: f64,
    pub h_x_given_zu: f64,
}

impl UPart {
    /// `I(Y;V|U) - I(Z;V|U) + H(X|Z,V)`, the key-free part of the first bound.
    pub fn first_term(&self, v: &VPart) -> f64 {
        self.i_yv_given_u - self.i_zv_given_u + v.h_x_given_zv
    }

    pub fn equivocation(&self, v: &VPart, key_rate: f64) -> f64 {
        (self.first_term(v) + key_rate).min(self.h_x_given_zu)
    }
}

impl SourceModel {
    pub fn new(source: &JointDist, d: &DistortionMeasure) -> Result<Self> {
        if source.names() != ["X", "Y", "Z"] {
            return Err(RegionError::InvalidParameter("source must be over (X, Y, Z)".into()));
        }
        let s = source.sizes();
        let (nx, ny, nz) = (s[0], s[1], s[2]);
        if d.source_alphabet().len() != nx {
            return Err(RegionError::InvalidParameter("distortion measure does not match |X|".into()));
        }
        let pxyz = source.mass();
        let mut pxy = vec![0.0; nx * ny];
        let mut pxz = vec![0.0; nx * nz];
        let mut px = vec![0.0; nx];
        let mut py = vec![0.0; ny];
        for x in 0..nx {
            for y in 0..ny {
                for z in 0..nz {
                    let p = pxyz[(x * ny + y) * nz + z];
                    pxy[x * ny + y] += p;
                    pxz[x * nz + z] += p;
                    px[x] += p;
                    py[y] += p;
                }
            }
        }
        Ok(Self {
            nx,
            ny,
            nz,
            nxh: d.recon_alphabet().len(),
            h_y: entropy_of(&py),
            h_xy: entropy_of(&pxy),
            pxy,
            pxz,
            px,
            dist: d.table().to_vec(),
        })
    }

    /// `vx` is `|X| x nv` row-major.
    pub fn v_part(&self, vx: &[f64], nv: usize) -> VPart {
        let (nx, ny, nz) = (self.nx, self.ny, self.nz);
        let mut pxyv = vec![0.0; nx * ny * nv];
        let mut pxzv = vec![0.0; nx * nz * nv];
        let mut pyv = vec![0.0; ny * nv];
        let mut pzv = vec![0.0; nz * nv];
        let mut pv = vec![0.0; nv];
        for x in 0..nx {
            for v in 0..nv {
                let w = vx[x * nv + v];
                if w == 0.0 {
                    continue;
                }
                for y in 0..ny {
                    let p = self.pxy[x * ny + y] * w;
                    pxyv[(x * ny + y) * nv + v] = p;
                    pyv[y * nv + v] += p;
                }
                for z in 0..nz {
                    let p = self.pxz[x * nz + z] * w;
                    pxzv[(x * nz + z) * nv + v] = p;
                    pzv[z * nv + v] += p;
                }
                pv[v] += self.px[x] * w;
            }
        }
        let h_yv = entropy_of(&pyv);
        let h_zv = entropy_of(&pzv);
        let rate_min = clamp_info(self.h_xy + h_yv - entropy_of(&pxyv) - self.h_y);
        let h_x_given_zv = clamp_info(entropy_of(&pxzv) - h_zv);

        let mut recon = vec![0; ny * nv];
        let mut distortion = 0.0;
        for y in 0..ny {
            for v in 0..nv {
                if pyv[y * nv + v] <= 0.0 {
                    continue;
                }
                let costs = (0..self.nxh).map(|xh| {
                    (0..nx).map(|x| pxyv[(x * ny + y) * nv + v] * self.dist[x * self.nxh + xh]).sum::<f64>()
                });
                let (best, cost) = argmin_lowest(costs);
                recon[y * nv + v] = best;
                distortion += cost;
            }
        }
        VPart {
            nv,
            pxzv,
            pyv,
            pzv,
            pv,
            rate_min,
            distortion,
            recon,
            h_yv,
            h_zv,
            h_x_given_zv,
        }
    }

    /// `uv` is `nv x nu` row-major.
    pub fn u_part(&self, v: &VPart, uv: &[f64], nu: usize) -> UPart {
        let (nx, ny, nz, nv) = (self.nx, self.ny, self.nz, v.nv);
        let mut pu = vec![0.0; nu];
        let mut pyu = vec![0.0; ny * nu];
        let mut pzu = vec![0.0; nz * nu];
        let mut pxzu = vec![0.0; nx * nz * nu];
        for vv in 0..nv {
            for u in 0..nu {
                let w = uv[vv * nu + u];
                if w == 0.0 {
                    continue;
                }
                pu[u] += v.pv[vv] * w;
                for y in 0..ny {
                    pyu[y * nu + u] += v.pyv[y * nv + vv] * w;
                }
                for z in 0..nz {
                    pzu[z * nu + u] += v.pzv[z * nv + vv] * w;
                }
                for xz in 0..nx * nz {
                    pxzu[xz * nu + u] += v.pxzv[xz * nv + vv] * w;
                }
            }
        }
        let h_u = entropy_of(&pu);
        let h_v = entropy_of(&v.pv);
        let h_zu = entropy_of(&pzu);
        // U - V - (Y, Z) makes I(Y;V|U) = H(Y,U) - H(U) - H(Y,V) + H(V)
        UPart {
            i_yv_given_u: clamp_info(entropy_of(&pyu) - h_u - v.h_yv + h_v),
            i_zv_given_u: clamp_info(h_zu - h_u - v.h_zv + h_v),
            h_x_given_zu: clamp_info(entropy_of(&pxzu) - h_zu),
        }
    }
}
