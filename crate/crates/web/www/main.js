import init, { width_curves, optimum, landscape, narrowing, centroid } from "./pkg/pairtime_web.js";

const PS = 1e-12;
const COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];
const $ = (id) => document.getElementById(id);
const num = (id) => parseFloat($(id).value);

function link() {
  return { beta: num("beta") * 1e-27, length: num("length") * 1e3 };
}

function fmt(v, unit) {
  if (!isFinite(v)) return String(v);
  const prefixes = [[1e-15, "f"], [1e-12, "p"], [1e-9, "n"], [1e-6, "u"], [1e-3, "m"], [1, ""], [1e3, "k"], [1e6, "M"], [1e9, "G"], [1e12, "T"]];
  let [scale, p] = prefixes[0];
  for (const [s, q] of prefixes) if (Math.abs(v) >= s) [scale, p] = [s, q];
  return `${(v / scale).toPrecision(3)} ${p}${unit}`;
}

// Line plot of series [{name, xs, ys}] with optional log axes.
function plot(canvas, series, { xlog = false, ylog = false, xlabel = "", ylabel = "", title = "" }) {
  const ctx = canvas.getContext("2d");
  const W = canvas.width, H = canvas.height, L = 64, R = 12, T = 24, B = 40;
  ctx.clearRect(0, 0, W, H);
  const tx = (v) => (xlog ? Math.log10(v) : v);
  const ty = (v) => (ylog ? Math.log10(v) : v);
  const ok = (x, y) => isFinite(tx(x)) && isFinite(ty(y));
  let x0 = Infinity, x1 = -Infinity, y0 = Infinity, y1 = -Infinity;
  for (const s of series) s.xs.forEach((x, i) => {
    if (!ok(x, s.ys[i])) return;
    x0 = Math.min(x0, tx(x)); x1 = Math.max(x1, tx(x));
    y0 = Math.min(y0, ty(s.ys[i])); y1 = Math.max(y1, ty(s.ys[i]));
  });
  if (!(x1 > x0)) { x0 -= 0.5; x1 += 0.5; }
  if (!(y1 > y0)) { y0 -= 0.5; y1 += 0.5; }
  const pad = 0.05 * (y1 - y0);
  y0 -= pad; y1 += pad;
  const px = (v) => L + ((tx(v) - x0) / (x1 - x0)) * (W - L - R);
  const py = (v) => H - B - ((ty(v) - y0) / (y1 - y0)) * (H - T - B);

  ctx.strokeStyle = "#000"; ctx.fillStyle = "#000"; ctx.font = "11px sans-serif";
  ctx.beginPath(); ctx.moveTo(L, T); ctx.lineTo(L, H - B); ctx.lineTo(W - R, H - B); ctx.stroke();
  for (let k = 0; k <= 4; k++) {
    const f = k / 4, xv = x0 + f * (x1 - x0), yv = y0 + f * (y1 - y0);
    const xt = xlog ? 10 ** xv : xv, yt = ylog ? 10 ** yv : yv;
    ctx.textAlign = "center"; ctx.fillText(xt.toPrecision(2), L + f * (W - L - R), H - B + 14);
    ctx.textAlign = "right"; ctx.fillText(yt.toPrecision(3), L - 4, H - B - f * (H - T - B) + 4);
  }
  ctx.textAlign = "center";
  ctx.fillText(xlabel, (L + W - R) / 2, H - 8);
  ctx.font = "13px sans-serif"; ctx.fillText(title, W / 2, 15);
  ctx.save(); ctx.translate(12, (T + H - B) / 2); ctx.rotate(-Math.PI / 2);
  ctx.font = "11px sans-serif"; ctx.fillText(ylabel, 0, 0); ctx.restore();

  series.forEach((s, j) => {
    ctx.strokeStyle = s.color || COLORS[j % COLORS.length]; ctx.lineWidth = 1.6;
    ctx.setLineDash(s.dash || []);
    ctx.beginPath();
    let started = false;
    s.xs.forEach((x, i) => {
      if (!ok(x, s.ys[i])) return;
      started ? ctx.lineTo(px(x), py(s.ys[i])) : ctx.moveTo(px(x), py(s.ys[i]));
      started = true;
    });
    ctx.stroke(); ctx.setLineDash([]);
    ctx.fillStyle = ctx.strokeStyle; ctx.textAlign = "right";
    ctx.fillText(s.name, W - R - 4, T + 14 * (j + 1));
  });
  return { px, py };
}

function ramp(t) {
  const r = Math.round(255 * t ** 0.8);
  const g = Math.round(255 * 0.8 * Math.max(0, 1 - Math.abs(2 * t - 1)));
  const b = Math.round(255 * (1 - t) ** 0.8);
  return `rgb(${r},${g},${b})`;
}

const GRID = { tauLo: 1e-14, tauHi: 1e-9, sigmaLo: 1e9, sigmaHi: 1e14, points: 120 };

function drawWidths() {
  const { beta, length } = link();
  const sigma = num("sigma");
  const o = optimum(sigma, beta, length);
  const v = width_curves(sigma, beta, length, 1e-13, 1e-9, 200);
  const cols = [0, 1, 2, 3].map((c) => Array.from({ length: v.length / 4 }, (_, i) => v[4 * i + c]));
  plot($("widths"), [
    { name: "tau1", xs: cols[0], ys: cols[1] },
    { name: "tau1h_0", xs: cols[0], ys: cols[2] },
    { name: "tau1h_dt_0", xs: cols[0], ys: cols[3] },
  ], { xlog: true, ylog: true, xlabel: "pump duration tau_p (s)", ylabel: "width (s)", title: `sigma = ${sigma.toExponential(3)} 1/s` });
  $("optimum").textContent = [
    `tau_p_opt  = ${fmt(o[0], "s")}`,
    `sigma_opt  = ${fmt(o[1], "Hz")}`,
    `tau_abs    = ${fmt(o[6], "s")}`,
    ``,
    `at this sigma:`,
    `  rho_opt   = ${o[2].toFixed(4)}`,
    `  tau1_min  = ${fmt(o[3], "s")}`,
    `  tau1h_min = ${fmt(o[4], "s")}`,
    `  tau1h_dt  = ${fmt(o[5], "s")}`,
  ].join("\n");
  return o;
}

function drawLandscape(o) {
  const { beta, length } = link();
  const n = GRID.points;
  const v = landscape($("which").value, beta, length, GRID.tauLo, GRID.tauHi, GRID.sigmaLo, GRID.sigmaHi, n);
  const canvas = $("landscape"), ctx = canvas.getContext("2d");
  const W = canvas.width, H = canvas.height, L = 64, R = 12, T = 12, B = 40;
  const lo = Math.min(...v), hi = Math.max(...v);
  const cw = (W - L - R) / n, ch = (H - T - B) / n;
  ctx.clearRect(0, 0, W, H);
  for (let r = 0; r < n; r++) for (let c = 0; c < n; c++) {
    ctx.fillStyle = ramp((v[r * n + c] - lo) / (hi - lo || 1));
    ctx.fillRect(L + c * cw, H - B - (r + 1) * ch, cw + 0.5, ch + 0.5);
  }
  const lx = (t) => L + (Math.log10(t / GRID.tauLo) / Math.log10(GRID.tauHi / GRID.tauLo)) * (W - L - R);
  const ly = (s) => H - B - (Math.log10(s / GRID.sigmaLo) / Math.log10(GRID.sigmaHi / GRID.sigmaLo)) * (H - T - B);
  ctx.strokeStyle = "#fff"; ctx.lineWidth = 2;
  ctx.beginPath(); ctx.arc(lx(o[0]), ly(o[1]), 6, 0, 2 * Math.PI); ctx.stroke();
  ctx.fillStyle = "#000"; ctx.font = "11px sans-serif"; ctx.textAlign = "center";
  for (let k = 0; k <= 5; k++) {
    const f = k / 5;
    ctx.fillText((GRID.tauLo * (GRID.tauHi / GRID.tauLo) ** f).toExponential(0), L + f * (W - L - R), H - B + 14);
    ctx.textAlign = "right";
    ctx.fillText((GRID.sigmaLo * (GRID.sigmaHi / GRID.sigmaLo) ** f).toExponential(0), L - 4, H - B - f * (H - T - B) + 4);
    ctx.textAlign = "center";
  }
  ctx.fillText(`tau_p (s); color: log10 ${$("which").value} from ${lo.toFixed(2)} to ${hi.toFixed(2)}`, (L + W - R) / 2, H - 8);
  ctx.save(); ctx.translate(12, (T + H - B) / 2); ctx.rotate(-Math.PI / 2); ctx.fillText("sigma (1/s)", 0, 0); ctx.restore();
}

function drawHerald() {
  const rho = num("rho"), t1 = num("tau1") * PS, t2 = num("tau2") * PS;
  const center = num("center") * PS, width = num("width") * PS, onOne = $("onone").checked;
  const ref = onOne ? t1 : t2;
  const n = narrowing(rho, t1, t2, center, ref * 1e-4, ref * 10, 120, onOne);
  const asym = n[0];
  const dts = [], ratios = [];
  for (let i = 1; i < n.length; i += 2) { dts.push(n[i]); ratios.push(n[i + 1]); }
  plot($("narrowing"), [
    { name: "ratio", xs: dts, ys: ratios },
    { name: `sqrt(1 - rho^2) = ${asym.toFixed(4)}`, xs: [dts[0], dts[dts.length - 1]], ys: [asym, asym], dash: [5, 4], color: "#888" },
  ], { xlog: true, xlabel: "window width dT (s)", ylabel: "heralded / unheralded width", title: "narrowing" });
  const c = centroid(rho, t1, t2, width, -3 * ref, 3 * ref, 121, onOne);
  const cs = [], ms = [];
  for (let i = 0; i < c.length; i += 2) { cs.push(c[i]); ms.push(c[i + 1]); }
  plot($("centroid"), [{ name: "heralded mean", xs: cs, ys: ms }],
    { xlabel: "window center (s)", ylabel: "mean arrival time (s)", title: "centroid" });
}

function guard(f) {
  return () => {
    try { f(); $("status").textContent = ""; }
    catch (e) { $("status").textContent = String(e.message || e); }
  };
}

await init();
const top = guard(() => drawLandscape(drawWidths()));
const bottom = guard(drawHerald);
for (const id of ["beta", "length", "sigma", "which"]) $(id).addEventListener("input", top);
for (const id of ["rho", "tau1", "tau2", "center", "width", "onone"]) $(id).addEventListener("input", bottom);
top();
bottom();
