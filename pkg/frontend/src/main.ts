import { App } from "./app.js";

const root = document.getElementById("app");
if (!root) throw new Error("missing #app container");

const user = new URLSearchParams(window.location.search).get("user") ?? "annotator";
void new App(root, user).start();
