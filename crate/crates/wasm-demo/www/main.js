import init, { detect_demo, persistence_demo, stability_demo } from "./pkg/topocycle_wasm_demo.js";

const $ = (id) => document.getElementById(id);
const PAD = 28;

// Affine map from data bounds to canvas pixels.
function frame(canvas, xs, ys) {
  const ctx = canvas.getContext("2d");
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  let [x0, x1] = [Math.min(...xs), Math.max(...xs)];
  let [y0, y1] = [Math.min(...ys), Math.max(...ys)];
  if (x1 === x0) x1 = x0 + 1;
  if (y1 === y0) y1 = y0 + 1;
  const w = canvas.width - 2 * PAD, h = canvas.height - 2 * PAD;
  const sx = (x) => PAD + ((x - x0) / (x1 - x0)) * w;
  const sy = (y) => canvas.height - PAD - ((y - y0) / (y1 - y0)) * h;
  ctx.strokeStyle = "#bbb";
  ctx.strokeRect(PAD, PAD, w, h);
  ctx.fillStyle = "#666";
  ctx.font = "10px sans-serif";
  ctx.fillText(y1.toPrecision(3), 2, PAD - 4);
  ctx.fillText(y0.toPrecision(3), 2, canvas.height - PAD + 12);
  ctx.fillText(x1.toPrecision(3), canvas.width - PAD - 20, canvas.height - 6);
  return { ctx, sx, sy, y0, y1 };
}

function polyline(f, xs, ys, color, width = 1) {
  f.ctx.strokeStyle = color;
  f.ctx.lineWidth = width;
  f.ctx.beginPath();
  xs.forEach((x, i) => (i ? f.ctx.lineTo(f.sx(x), f.sy(ys[i])) : f.ctx.moveTo(f.sx(x), f.sy(ys[i]))));
  f.ctx.stroke();
  f.ctx.lineWidth = 1;
}

function vline(f, x, color, dash = []) {
  f.ctx.strokeStyle = color;
  f.ctx.setLineDash(dash);
  f.ctx.beginPath();
  f.ctx.moveTo(f.sx(x), f.sy(f.y0));
  f.ctx.lineTo(f.sx(x), f.sy(f.y1));
  f.ctx.stroke();
  f.ctx.setLineDash([]);
}

function dot(f, x, y, color, r = 3) {
  f.ctx.fillStyle = color;
  f.ctx.beginPath();
  f.ctx.arc(f.sx(x), f.sy(y), r, 0, 2 * Math.PI);
  f.ctx.fill();
}

// Birth/death plane; essential points are drawn on the top edge.
function diagram(canvas, sets) {
  const all = sets.flatMap((s) => s.points);
  const finite = all.filter((p) => p.death !== null).map((p) => p.death);
  const top = Math.max(1e-9, ...finite, ...all.map((p) => p.birth)) * 1.1;
  const lo = Math.min(0, ...all.map((p) => p.birth));
  const f = frame(canvas, [lo, top], [lo, top]);
  polyline(f, [lo, top], [lo, top], "#ccc");
  for (const s of sets) {
    for (const p of s.points) {
      const color = s.color ?? (p.significant ? "#e65100" : "#555");
      dot(f, p.birth, p.death ?? top, color, p.death === null ? 5 : 3);
    }
  }
  f.ctx.fillStyle = "#666";
  f.ctx.fillText("birth", canvas.width / 2, canvas.height - 6);
  f.ctx.fillText("death", 2, canvas.height / 2);
}

function fmt(xs) {
  return xs.map((t) => +t.toFixed(4)).join(", ");
}

const DEFAULTS = { 1: [0.3, 0.6], 2: [0.4, 0.5], 3: [0.05, 1.0] };

function runDetect() {
  $("noise-v").textContent = $("noise").value;
  const out = $("detect-out");
  let v;
  try {
    v = JSON.parse(
      detect_demo($("curve").value, +$("method").value, +$("eps").value, +$("delta").value, +$("noise").value, +$("seed").value),
    );
  } catch (e) {
    out.className = "out err";
    out.textContent = String(e.message ?? e);
    return;
  }
  const ph = frame($("phase"), v.xy.map((p) => p[0]), v.xy.map((p) => p[1]));
  polyline(ph, v.xy.map((p) => p[0]), v.xy.map((p) => p[1]), "#444");
  for (const t of v.recurrence_times) {
    const i = v.t.findIndex((s) => s >= t - 1e-12);
    if (i >= 0) dot(ph, v.xy[i][0], v.xy[i][1], "#1565c0", 4);
  }

  const su = frame($("surr"), v.surrogate_t, v.surrogate_v);
  if (+$("method").value !== 3) v.true_times.forEach((t) => vline(su, t, "#999", [4, 3]));
  v.recurrence_times.forEach((t) => vline(su, t, "#1565c0"));
  polyline(su, v.surrogate_t, v.surrogate_v, "#222");
  v.points.filter((p) => p.significant).forEach((p) => dot(su, p.time, p.birth, "#e65100"));

  diagram($("diag1"), [{ points: v.points }]);

  out.className = v.error ? "out err" : "out";
  out.textContent = v.error
    ? `no recurrence: ${v.error}`
    : `detected times: ${fmt(v.recurrence_times)}\ntrue times:     ${fmt(v.true_times)}`;
}

const N = 80;
let drawn = [];
function resetDrawn() {
  drawn = Array.from({ length: N }, (_, i) => 1.5 + Math.cos((i / N) * 6 * Math.PI) + 0.4 * Math.sin((i / N) * 17));
}

function runPersistence() {
  const canvas = $("draw");
  const idx = drawn.map((_, i) => i);
  const f = frame(canvas, idx, [0, 3]);
  polyline(f, idx, drawn, "#222", 2);
  const out = $("pers-out");
  let v;
  try {
    v = JSON.parse(persistence_demo(Float64Array.from(drawn), +$("p-eps").value, +$("p-delta").value));
  } catch (e) {
    out.className = "out err";
    out.textContent = String(e.message ?? e);
    return;
  }
  f.ctx.strokeStyle = "#e65100";
  f.ctx.setLineDash([3, 3]);
  f.ctx.beginPath();
  f.ctx.moveTo(f.sx(0), f.sy(+$("p-eps").value));
  f.ctx.lineTo(f.sx(N - 1), f.sy(+$("p-eps").value));
  f.ctx.stroke();
  f.ctx.setLineDash([]);
  v.points.forEach((p) => dot(f, p.time, p.birth, p.significant ? "#e65100" : "#555", 4));
  diagram($("diag2"), [{ points: v.points }]);
  const sig = v.points.filter((p) => p.significant).map((p) => p.time);
  out.className = "out";
  out.textContent = `${v.points.length} minima, significant at indices: ${sig.join(", ") || "none"}`;
}

function drawAt(ev) {
  const canvas = $("draw");
  const r = canvas.getBoundingClientRect();
  const x = ((ev.clientX - r.left) / r.width) * canvas.width;
  const y = ((ev.clientY - r.top) / r.height) * canvas.height;
  const i = Math.round(((x - PAD) / (canvas.width - 2 * PAD)) * (N - 1));
  if (i < 0 || i >= N) return;
  const val = ((canvas.height - PAD - y) / (canvas.height - 2 * PAD)) * 3;
  for (let k = Math.max(0, i - 1); k <= Math.min(N - 1, i + 1); k++) drawn[k] = Math.min(3, Math.max(0, val));
  runPersistence();
}

function runStability() {
  $("eta-v").textContent = $("eta").value;
  const out = $("stab-out");
  let v;
  try {
    v = JSON.parse(stability_demo(+$("eta").value, +$("s-seed").value));
  } catch (e) {
    out.className = "out err";
    out.textContent = String(e.message ?? e);
    return;
  }
  const f = frame($("stab"), v.t, [...v.clean, ...v.noisy]);
  polyline(f, v.t, v.noisy, "#e65100");
  polyline(f, v.t, v.clean, "#222");
  diagram($("diag3"), [
    { points: v.noisy_points, color: "#e65100" },
    { points: v.clean_points, color: "#222" },
  ]);
  out.className = "out";
  out.textContent =
    `sup distance between curves: ${v.eta.toFixed(4)}\n` +
    `bottleneck distance:         ${v.bottleneck.toFixed(4)}  (bound ${v.bound.toFixed(4)})`;
}

await init();

$("method").addEventListener("change", () => {
  [$("eps").value, $("delta").value] = DEFAULTS[$("method").value];
  runDetect();
});
for (const id of ["curve", "eps", "delta", "noise", "seed"]) $(id).addEventListener("input", runDetect);

let dragging = false;
$("draw").addEventListener("pointerdown", (e) => { dragging = true; drawAt(e); });
window.addEventListener("pointerup", () => (dragging = false));
$("draw").addEventListener("pointermove", (e) => dragging && drawAt(e));
$("p-reset").addEventListener("click", () => { resetDrawn(); runPersistence(); });
for (const id of ["p-eps", "p-delta"]) $(id).addEventListener("input", runPersistence);

for (const id of ["eta", "s-seed"]) $(id).addEventListener("input", runStability);

resetDrawn();
runDetect();
runPersistence();
runStability();
