import { ConsoleApi } from "./api.js";
import { ConsoleApp } from "./app.js";

const mount = document.querySelector<HTMLElement>("#app");
if (!mount) throw new Error("missing #app mount point");

const app = new ConsoleApp(mount, new ConsoleApi(""));
app.init().catch((e) => {
  mount.innerHTML = `<div class="error">console failed to start: ${String(e)}</div>`;
});
