import init, { wulff_shape, torsion_field, spaceform_profile } from "./pkg/anisolab_web.js";

const $ = (id) => document.getElementById(id);

function call(out, f) {
  try {
    return JSON.parse(f());
  } catch (e) {
    out.textContent = `error: ${e}`;
    return null;
  }
}

function fit(points, canvas, pad = 16) {
  let [x0, y0, x1, y1] = [Infinity, Infinity, -Infinity, -Infinity];
  for (const [x, y] of points) {
    x0 = Math.min(x0, x); x1 = Math.max(x1, x);
    y0 = Math.min(y0, y); y1 = Math.max(y1, y);
  }
  const s = Math.min((canvas.width - 2 * pad) / (x1 - x0), (canvas.height - 2 * pad) / (y1 - y0));
  const cx = (x0 + x1) / 2, cy = (y0 + y1) / 2;
  return ([x, y]) => [canvas.width / 2 + s * (x - cx), canvas.height / 2 - s * (y - cy)];
}

function polyline(ctx, pts, map, color) {
  ctx.strokeStyle = color;
  ctx.beginPath();
  pts.forEach((p, i) => {
    const [x, y] = map(p);
    i ? ctx.lineTo(x, y) : ctx.moveTo(x, y);
  });
  ctx.closePath();
  ctx.stroke();
}

function drawWulff() {
  const out = $("w-out");
  const r = call(out, () => wulff_shape($("w-gauge").value, 360));
  if (!r) return;
  const canvas = $("w-canvas");
  const ctx = canvas.getContext("2d");
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  const map = fit(r.wulff.concat(r.unit_ball), canvas);
  ctx.lineWidth = 2;
  polyline(ctx, r.wulff, map, "#1f6fb2");
  polyline(ctx, r.unit_ball, map, "#d27a12");
  out.textContent = `${r.gauge}\nblue: Wulff shape {F° ≤ 1}, area κ = ${r.kappa_n.toFixed(6)}\norange: unit ball {F ≤ 1}`;
}

function color(t) {
  const r = Math.round(255 * Math.min(1, Math.max(0, 1.5 * t - 0.25)));
  const g = Math.round(255 * Math.min(1, Math.max(0, 1.5 - Math.abs(2 * t - 1) * 1.5)));
  const b = Math.round(255 * Math.min(1, Math.max(0, 1.25 - 1.5 * t)));
  return `rgb(${r},${g},${b})`;
}

function drawTorsion() {
  const out = $("t-out");
  out.textContent = "solving...";
  const args = [$("t-domain").value, $("t-gauge").value, Number($("t-p").value), Number($("t-h").value)];
  const r = call(out, () => torsion_field(...args));
  if (!r) return;
  const canvas = $("t-canvas");
  const ctx = canvas.getContext("2d");
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  const map = fit(r.vertices, canvas);
  const top = r.max > 0 ? r.max : 1;
  for (const tri of r.triangles) {
    const mean = (r.values[tri[0]] + r.values[tri[1]] + r.values[tri[2]]) / 3;
    ctx.fillStyle = ctx.strokeStyle = color(mean / top);
    ctx.beginPath();
    tri.forEach((v, i) => {
      const [x, y] = map(r.vertices[v]);
      i ? ctx.lineTo(x, y) : ctx.moveTo(x, y);
    });
    ctx.closePath();
    ctx.fill();
    ctx.stroke();
  }
  out.textContent =
    `torsional rigidity T = ${r.torsional_rigidity.toPrecision(6)}\n` +
    `max u = ${r.max.toPrecision(6)}\n` +
    `${r.triangles.length} triangles, h_max = ${r.h_max.toFixed(4)}, ${r.iterations} iterations`;
}

function drawSpaceform() {
  const out = $("s-out");
  const table = $("s-checks");
  table.innerHTML = "";
  const r = call(out, () => spaceform_profile(Number($("s-n").value), Number($("s-k").value), Number($("s-theta").value)));
  if (!r) return;
  const canvas = $("s-canvas");
  const ctx = canvas.getContext("2d");
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  const pad = 24;
  const rmax = r.r[r.r.length - 1];
  const umax = Math.max(...r.u) || 1;
  const X = (x) => pad + (canvas.width - 2 * pad) * (x / rmax);
  const Y = (y) => canvas.height - pad - (canvas.height - 2 * pad) * (y / umax);
  ctx.strokeStyle = "#999";
  ctx.strokeRect(pad, pad, canvas.width - 2 * pad, canvas.height - 2 * pad);
  ctx.strokeStyle = "#1f6fb2";
  ctx.lineWidth = 2;
  ctx.beginPath();
  r.r.forEach((x, i) => (i ? ctx.lineTo(X(x), Y(r.u[i])) : ctx.moveTo(X(x), Y(r.u[i]))));
  ctx.stroke();
  ctx.fillStyle = "#222";
  ctx.fillText("u(r)", pad + 4, pad + 12);
  ctx.fillText(`r = ${rmax}`, canvas.width - pad - 50, canvas.height - 8);
  out.textContent = `T = ${r.torsion.toPrecision(8)}\nV = ${r.volume.toPrecision(8)}\n|∂B| = ${r.area.toPrecision(8)}`;
  table.innerHTML = "<tr><th>check</th><th>lhs</th><th>rhs</th><th>slack</th></tr>";
  for (const c of r.checks) {
    const row = table.insertRow();
    if (!c.satisfied) row.className = "fail";
    row.innerHTML = `<td>${c.check}</td><td>${c.lhs.toExponential(4)}</td><td>${c.rhs.toExponential(4)}</td><td>${c.slack.toExponential(2)}</td>`;
  }
}

await init();
$("w-run").onclick = drawWulff;
$("t-run").onclick = drawTorsion;
$("s-run").onclick = drawSpaceform;
drawWulff();
drawTorsion();
drawSpaceform();
