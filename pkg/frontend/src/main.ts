import { CurationApi } from "./api";
import { mountApp } from "./app";
import "./style.css";

const reviewer = localStorage.getItem("kh-reviewer") ?? "anonymous";
void mountApp(document.getElementById("app")!, new CurationApi(""), reviewer);
