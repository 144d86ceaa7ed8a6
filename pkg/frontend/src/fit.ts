/** Least-squares slope of y against x (presentation-level refits only). */
export function leastSquaresSlope(xs: number[], ys: number[]): number {
  const n = xs.length;
  if (n < 2 || n !== ys.length) {
    throw new Error(`need at least two matching points, got ${n}/${ys.length}`);
  }
  let sx = 0;
  let sy = 0;
  let sxx = 0;
  let sxy = 0;
  for (let i = 0; i < n; i++) {
    sx += xs[i]!;
    sy += ys[i]!;
    sxx += xs[i]! * xs[i]!;
    sxy += xs[i]! * ys[i]!;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

/** Slope on doubly log-transformed data over the trailing `window` points. */
export function logLogSlope(xs: number[], ys: number[], window?: number): number {
  const k = window ? Math.min(window, xs.length) : xs.length;
  const tx = xs.slice(-k).map(Math.log);
  const ty = ys.slice(-k).map(Math.log);
  return leastSquaresSlope(tx, ty);
}
