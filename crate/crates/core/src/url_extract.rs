//! Turns proxy-style request paths (`/www.example.com/dir/page.html?q=1`)
//! into site, directory and page components.

use std::fmt;

use serde::Serialize;

/// The host a page was fetched from, or `Local` when the first path segment
/// is not a hostname.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Site {
    Host(String),
    Local,
}

impl Site {
    pub fn host(&self) -> Option<&str> {
        match self {
            Site::Host(h) => Some(h),
            Site::Local => None,
        }
    }

    pub fn is_local(&self) -> bool {
        matches!(self, Site::Local)
    }
}

impl fmt::Display for Site {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Site::Host(h) => f.write_str(h),
            Site::Local => f.write_str("<local>"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct PageRef {
    pub site: Site,
    /// Lowercased path segments between the site and the page.
    pub directories: Vec<String>,
    /// Final segment; empty for directory URLs.
    pub page: String,
    pub raw: String,
}

impl PageRef {
    /// True for the bare `/` resource.
    pub fn is_empty_path(&self) -> bool {
        self.site.is_local() && self.directories.is_empty() && self.page.is_empty()
    }

    /// Directory segments joined with `/`, or `/` for the site root.
    pub fn directory_path(&self) -> String {
        if self.directories.is_empty() {
            "/".to_string()
        } else {
            self.directories.join("/")
        }
    }

    /// Lowercased, query-free path rebuilt from the components.
    pub fn canonical_path(&self) -> String {
        let mut parts: Vec<&str> = Vec::with_capacity(self.directories.len() + 2);
        if let Site::Host(h) = &self.site {
            parts.push(h);
        }
        parts.extend(self.directories.iter().map(String::as_str));
        let mut path = String::from("/");
        path.push_str(&parts.join("/"));
        if !parts.is_empty() {
            path.push('/');
        }
        path.push_str(&self.page);
        path
    }

    /// Equality on everything except the raw resource string.
    pub fn same_location(&self, other: &PageRef) -> bool {
        self.site == other.site && self.directories == other.directories && self.page == other.page
    }
}

/// Cuts the resource at the first `?` or `#`.
pub fn strip_query(resource: &str) -> &str {
    match resource.find(['?', '#']) {
        Some(i) => &resource[..i],
        None => resource,
    }
}

/// Dot-separated labels of `[a-z0-9-]`, at least two, none empty.
pub fn is_hostname(s: &str) -> bool {
    let mut labels = 0;
    for label in s.split('.') {
        if label.is_empty()
            || !label
                .bytes()
                .all(|b| b.is_ascii_lowercase() || b.is_ascii_digit() || b == b'-')
        {
            return false;
        }
        labels += 1;
    }
    labels >= 2
}

pub fn extract_page_ref(resource: &str) -> PageRef {
    let path = strip_query(resource).to_lowercase();
    let body = path.strip_prefix('/').unwrap_or(&path);
    let is_dir_url = body.is_empty() || body.ends_with('/');

    let mut segments: Vec<&str> = body.split('/').filter(|s| !s.is_empty()).collect();
    let site = match segments.first() {
        Some(first) if is_hostname(first) => {
            let host = segments.remove(0).to_string();
            Site::Host(host)
        }
        _ => Site::Local,
    };
    let page = if is_dir_url {
        String::new()
    } else {
        segments.pop().unwrap_or_default().to_string()
    };
    PageRef {
        site,
        directories: segments.into_iter().map(str::to_string).collect(),
        page,
        raw: resource.to_string(),
    }
}

/// Keyword tokens for a page: site labels without a leading `www` and the
/// last label, each directory, and the page name minus its extension, all
/// split on non-alphanumerics.
pub fn tokenize(page: &PageRef) -> Vec<String> {
    let mut tokens = Vec::new();
    if let Site::Host(host) = &page.site {
        let mut labels: Vec<&str> = host.split('.').collect();
        labels.pop();
        if labels.first() == Some(&"www") {
            labels.remove(0);
        }
        for label in labels {
            push_words(label, &mut tokens);
        }
    }
    for dir in &page.directories {
        push_words(dir, &mut tokens);
    }
    push_words(page_stem(&page.page), &mut tokens);
    tokens
}

fn page_stem(page: &str) -> &str {
    match page.rfind('.') {
        Some(i) if i > 0 => &page[..i],
        _ => page,
    }
}

fn push_words(s: &str, out: &mut Vec<String>) {
    out.extend(
        s.split(|c: char| !c.is_ascii_alphanumeric())
            .filter(|w| !w.is_empty())
            .map(str::to_ascii_lowercase),
    );
}

#[cfg(test)]
mod tests {
    use super::*;

    fn host(h: &str) -> Site {
        Site::Host(h.to_string())
    }

    #[test]
    fn strip_query_examples() {
        assert_eq!(
            strip_query("/www.google.co.in/search?client=opera&rls=en"),
            "/www.google.co.in/search"
        );
        assert_eq!(strip_query("/a/b/c.html"), "/a/b/c.html");
        assert_eq!(strip_query("/x?a=1#frag"), "/x");
        assert_eq!(strip_query("/x#frag?a=1"), "/x");
        assert_eq!(strip_query("/a%3Fb"), "/a%3Fb");
    }

    #[test]
    fn hostname_grammar() {
        assert!(is_hostname("www.w3schools.com"));
        assert!(is_hostname("a-b.c"));
        assert!(is_hostname("10.0.0.1"));
        assert!(!is_hostname("apache_pb.gif"));
        assert!(!is_hostname("localhost"));
        assert!(!is_hostname("a..b"));
        assert!(!is_hostname(".a.b"));
        assert!(!is_hostname("Www.x.com"));
        assert!(!is_hostname(""));
    }

    #[test]
    fn extracts_sites_directories_pages() {
        let r = extract_page_ref("/www.w3schools.com/xml/note.xml");
        assert_eq!(r.site, host("www.w3schools.com"));
        assert_eq!(r.directories, ["xml"]);
        assert_eq!(r.page, "note.xml");

        let r = extract_page_ref("/www.microsoft.com/contact/contactus.html");
        assert_eq!(r.site, host("www.microsoft.com"));
        assert_eq!(r.directories, ["contact"]);
        assert_eq!(r.page, "contactus.html");

        let r = extract_page_ref("/apache_pb.gif");
        assert_eq!(r.site, Site::Local);
        assert!(r.directories.is_empty());
        assert_eq!(r.page, "apache_pb.gif");
    }

    #[test]
    fn directory_urls_have_empty_page() {
        let r = extract_page_ref("/www.google.co.in/");
        assert_eq!(r.site, host("www.google.co.in"));
        assert!(r.directories.is_empty());
        assert_eq!(r.page, "");
        assert_eq!(r.canonical_path(), "/www.google.co.in/");
    }

    #[test]
    fn bare_slash_is_empty_path() {
        let r = extract_page_ref("/");
        assert!(r.is_empty_path());
        assert_eq!(r.canonical_path(), "/");
    }

    #[test]
    fn lowercases_and_drops_empty_segments() {
        let r = extract_page_ref("/WWW.Google.COM//Accounts/ServiceLogin?service=mail");
        assert_eq!(r.site, host("www.google.com"));
        assert_eq!(r.directories, ["accounts"]);
        assert_eq!(r.page, "servicelogin");
        assert_eq!(r.raw, "/WWW.Google.COM//Accounts/ServiceLogin?service=mail");
    }

    #[test]
    fn tokenize_examples() {
        let t = tokenize(&extract_page_ref("/www.w3schools.com/xml/note.xml"));
        assert_eq!(t, ["w3schools", "xml", "note"]);
        let t = tokenize(&extract_page_ref("/apache_pb.gif"));
        assert_eq!(t, ["apache", "pb"]);
        let t = tokenize(&extract_page_ref("/www.google.co.in/"));
        assert_eq!(t, ["google", "co"]);
    }

    #[test]
    fn page_stem_keeps_dotfiles() {
        assert_eq!(page_stem(".htaccess"), ".htaccess");
        assert_eq!(page_stem("a.tar.gz"), "a.tar");
        assert_eq!(page_stem("search"), "search");
    }
}
